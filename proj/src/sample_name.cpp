#include "duet/sample_name.hpp"

#include <charconv>
#include <limits>

#include "duet/errors.hpp"

namespace duet {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

int two_digit_field(std::string_view s, std::string_view field, int lo, int hi) {
    if (s.size() != 2 || !all_digits(s)) {
        throw ParseError(std::string(field) + ": expected two digits, got '" + std::string(s) + "'");
    }
    int v = (s[0] - '0') * 10 + (s[1] - '0');
    if (v < lo || v > hi) {
        throw ParseError(std::string(field) + " out of range [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]: " + std::to_string(v));
    }
    return v;
}

std::int64_t timestamp_field(std::string_view s, std::string_view field) {
    if (!all_digits(s)) {
        throw ParseError(std::string(field) + ": not a non-negative integer: '" + std::string(s) + "'");
    }
    if (s.size() > 1 && s[0] == '0') {
        throw ParseError(std::string(field) + ": leading zero in '" + std::string(s) + "'");
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(std::string(field) + ": does not fit in 64 bits: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::string_view location_text(LocationCode loc) noexcept {
    switch (loc) {
        case LocationCode::CM: return "CM";
        case LocationCode::CC: return "CC";
        case LocationCode::CL: return "CL";
    }
    return "??";
}

LocationCode parse_location(std::string_view text) {
    for (auto loc : kAllLocations) {
        if (location_text(loc) == text) return loc;
    }
    throw ParseError("location: unknown code '" + std::string(text) + "'");
}

SampleCode parse_sample_code(std::string_view text) {
    if (text.size() != 6) {
        throw ParseError("code: expected six characters LLIISS, got '" + std::string(text) + "'");
    }
    SampleCode code;
    code.location = parse_location(text.substr(0, 2));
    code.activity_index = two_digit_field(text.substr(2, 2), "activity index", kMinActivityIndex,
                                          kMaxActivityIndex);
    code.pair_index = two_digit_field(text.substr(4, 2), "pair index", kMinPairIndex, kMaxPairIndex);
    return code;
}

std::string format_sample_code(const SampleCode& code) {
    std::string out(location_text(code.location));
    out += static_cast<char>('0' + code.activity_index / 10);
    out += static_cast<char>('0' + code.activity_index % 10);
    out += static_cast<char>('0' + code.pair_index / 10);
    out += static_cast<char>('0' + code.pair_index % 10);
    return out;
}

std::pair<std::int64_t, std::int64_t> parse_time_window(std::string_view text) {
    auto sep = text.find('_');
    if (sep == std::string_view::npos) {
        throw ParseError("time window: expected t1_t2, got '" + std::string(text) + "'");
    }
    auto t1 = timestamp_field(text.substr(0, sep), "t_start");
    auto t2 = timestamp_field(text.substr(sep + 1), "t_end");
    if (t1 >= t2) {
        throw ParseError("time window: t_start " + std::to_string(t1) + " is not before t_end " +
                         std::to_string(t2));
    }
    return {t1, t2};
}

std::string format_time_window(std::int64_t t_start, std::int64_t t_end) {
    return std::to_string(t_start) + "_" + std::to_string(t_end);
}

SampleName parse_sample_name(std::string_view text) {
    if (text.size() < 7 || text[6] != '_') {
        throw ParseError("sample name: expected LLIISS_t1_t2, got '" + std::string(text) + "'");
    }
    auto code = parse_sample_code(text.substr(0, 6));
    auto [t1, t2] = parse_time_window(text.substr(7));
    return {code.location, code.activity_index, code.pair_index, t1, t2};
}

std::string format_sample_name(const SampleName& name) {
    return format_sample_code(name.code()) + "_" + format_time_window(name.t_start, name.t_end);
}

ActivityLabel activity_label_of(const SampleName& name) {
    return ActivityLabel{name.activity_index - 1};
}

}  // namespace duet
