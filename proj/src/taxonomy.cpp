#include "duet/taxonomy.hpp"

#include <string>

namespace duet {

ActivityLabel::ActivityLabel(int value) : value_(value) {
    if (value < 0 || value >= kNumActivities) {
        throw DomainError("activity label out of range [0, 11]: " + std::to_string(value));
    }
}

const std::array<ActivityInfo, kNumActivities>& activity_table() noexcept {
    using F = KinesicFunction;
    static constexpr std::array<ActivityInfo, kNumActivities> table = {{
        {0, "Waving in", F::Emblem},
        {1, "Thumbs up", F::Emblem},
        {2, "Waving", F::Emblem},
        {3, "Pointing", F::Illustrator},
        {4, "Showing measurements", F::Illustrator},
        {5, "Nodding", F::Regulator},
        {6, "Drawing circles in the air", F::Regulator},
        {7, "Holding palms out", F::Regulator},
        {8, "Scratching hair", F::Adaptor},
        {9, "Laughing", F::AffectDisplay},
        {10, "Arm crossing", F::AffectDisplay},
        {11, "Hugging", F::AffectDisplay},
    }};
    return table;
}

const ActivityInfo& activity_info(ActivityLabel label) noexcept {
    return activity_table()[static_cast<std::size_t>(label.value())];
}

KinesicFunction kinesic_function_of(ActivityLabel label) noexcept {
    return activity_info(label).function;
}

KinesicFunction kinesic_function_of(int label) {
    return kinesic_function_of(ActivityLabel{label});
}

std::set<ActivityLabel> labels_for_function(KinesicFunction f) {
    std::set<ActivityLabel> out;
    for (const auto& row : activity_table()) {
        if (row.function == f) out.insert(ActivityLabel{row.label});
    }
    return out;
}

int function_label_index(KinesicFunction f, const std::set<KinesicFunction>& present) {
    // std::set orders by the enum value, which is the canonical order.
    int rank = 0;
    for (auto g : present) {
        if (g == f) return rank;
        ++rank;
    }
    throw DomainError("kinesic function '" + std::string(function_name(f)) +
                      "' is not among the present functions");
}

std::string_view function_name(KinesicFunction f) noexcept {
    switch (f) {
        case KinesicFunction::Emblem: return "EMBLEM";
        case KinesicFunction::Illustrator: return "ILLUSTRATOR";
        case KinesicFunction::Regulator: return "REGULATOR";
        case KinesicFunction::Adaptor: return "ADAPTOR";
        case KinesicFunction::AffectDisplay: return "AFFECT_DISPLAY";
    }
    return "?";
}

KinesicFunction parse_function_name(std::string_view name) {
    for (auto f : kAllFunctions) {
        if (function_name(f) == name) return f;
    }
    throw DomainError("unknown kinesic function: " + std::string(name));
}

}  // namespace duet
