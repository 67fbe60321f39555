#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string_view>

#include "duet/errors.hpp"

namespace duet {

inline constexpr int kNumActivities = 12;
inline constexpr int kNumFunctions = 5;

/// Kinesic communicative functions in canonical (label-table) order.
enum class KinesicFunction : std::uint8_t {
    Emblem = 0,
    Illustrator = 1,
    Regulator = 2,
    Adaptor = 3,
    AffectDisplay = 4,
};

/// One of the twelve dyadic activities, numbered 0..11.
class ActivityLabel {
public:
    constexpr ActivityLabel() = default;
    explicit ActivityLabel(int value);

    [[nodiscard]] constexpr int value() const noexcept { return value_; }

    friend constexpr auto operator<=>(ActivityLabel, ActivityLabel) = default;

private:
    int value_ = 0;
};

struct ActivityInfo {
    int label;
    std::string_view name;
    KinesicFunction function;
};

/// The 12-row activity table.
const std::array<ActivityInfo, kNumActivities>& activity_table() noexcept;

const ActivityInfo& activity_info(ActivityLabel label) noexcept;

KinesicFunction kinesic_function_of(ActivityLabel label) noexcept;

/// Convenience overload that validates a raw integer label first.
KinesicFunction kinesic_function_of(int label);

std::set<ActivityLabel> labels_for_function(KinesicFunction f);

/// Rank of `f` among `present` in canonical order. Throws DomainError if absent.
int function_label_index(KinesicFunction f, const std::set<KinesicFunction>& present);

std::string_view function_name(KinesicFunction f) noexcept;
KinesicFunction parse_function_name(std::string_view name);

inline constexpr std::array<KinesicFunction, kNumFunctions> kAllFunctions = {
    KinesicFunction::Emblem, KinesicFunction::Illustrator, KinesicFunction::Regulator,
    KinesicFunction::Adaptor, KinesicFunction::AffectDisplay};

}  // namespace duet
