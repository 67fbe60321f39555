#include <malloc.h>

#include <gtest/gtest.h>

int main(int argc, char** argv) {
    // Same allocator tuning as the tool: training allocates many equal-sized temporaries.
    mallopt(M_MMAP_MAX, 0);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    ::testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}
