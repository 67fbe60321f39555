#include <malloc.h>

#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    // Training churns through same-sized temporaries; keep them on the heap instead of
    // mapping and unmapping pages for every batch.
    mallopt(M_MMAP_MAX, 0);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return duet::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
