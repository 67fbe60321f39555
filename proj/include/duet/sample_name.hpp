#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "duet/taxonomy.hpp"

namespace duet {

/// Recording site: CM open indoor, CC confined indoor, CL outdoor.
enum class LocationCode : std::uint8_t { CM = 0, CC = 1, CL = 2 };

inline constexpr std::array<LocationCode, 3> kAllLocations = {LocationCode::CM, LocationCode::CC,
                                                              LocationCode::CL};

std::string_view location_text(LocationCode loc) noexcept;
LocationCode parse_location(std::string_view text);

inline constexpr int kMinActivityIndex = 1;
inline constexpr int kMaxActivityIndex = 12;
inline constexpr int kMinPairIndex = 1;
inline constexpr int kMaxPairIndex = 10;

/// The six-character LLIISS code: location, 1-based activity, subject pair.
struct SampleCode {
    LocationCode location = LocationCode::CM;
    int activity_index = 1;
    int pair_index = 1;

    friend bool operator==(const SampleCode&, const SampleCode&) = default;
};

/// Identity of one clip: LLIISS_t1_t2, timestamps in milliseconds.
struct SampleName {
    LocationCode location = LocationCode::CM;
    int activity_index = 1;
    int pair_index = 1;
    std::int64_t t_start = 0;
    std::int64_t t_end = 1;

    [[nodiscard]] SampleCode code() const { return {location, activity_index, pair_index}; }

    friend auto operator<=>(const SampleName&, const SampleName&) = default;
};

/// Parses "LLIISS". Throws ParseError naming the offending field.
SampleCode parse_sample_code(std::string_view text);
std::string format_sample_code(const SampleCode& code);

/// Parses "t1_t2" (non-negative decimal integers without leading zeros, t1 < t2).
std::pair<std::int64_t, std::int64_t> parse_time_window(std::string_view text);
std::string format_time_window(std::int64_t t_start, std::int64_t t_end);

/// Parses "LLIISS_t1_t2". Throws ParseError naming the offending field.
SampleName parse_sample_name(std::string_view text);

/// Canonical zero-padded form. Inverse of parse_sample_name.
std::string format_sample_name(const SampleName& name);

/// Label numbering is 0-based while II is 1-based: label = II - 1.
ActivityLabel activity_label_of(const SampleName& name);

}  // namespace duet
