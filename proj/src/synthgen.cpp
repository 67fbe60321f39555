#include "duet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>

#include <Eigen/Geometry>

#include "duet/dataset_tree.hpp"
#include "duet/errors.hpp"
#include "duet/hash.hpp"

namespace duet::synth {

using Vec3 = Eigen::Vector3d;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClipMs = 3000.0;
constexpr double kCameraHeight = 1000.0;  // mm above the floor
constexpr std::int64_t kRecordingStartMs = 40'000'000;
constexpr std::int64_t kRepetitionStrideMs = 3'300;
constexpr std::int64_t kBreakMs = 120'000;

using duet::splitmix64;

std::uint64_t fnv1a(std::string_view s) { return fnv1a64(s); }

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

/// Smooth window that is 1 on [a, b] with ramps of width `ramp` on both sides.
double window(double u, double a, double b, double ramp = 0.08) {
    return smoothstep((u - a) / ramp + 1.0) * smoothstep((b - u) / ramp + 1.0);
}

Vec3 rotate_x(const Vec3& p, double deg) {
    return Eigen::AngleAxisd(deg * kPi / 180.0, Vec3::UnitX()) * p;
}

Vec3 rotate_y(const Vec3& p, double deg) {
    return Eigen::AngleAxisd(deg * kPi / 180.0, Vec3::UnitY()) * p;
}

/// What a template asks of one subject at one instant.
struct Gesture {
    double lean = 0.0;        // deg, positive forward
    double head_pitch = 0.0;  // deg, positive down
    double head_yaw = 0.0;    // deg, positive toward own left
    double shrug = 0.0;       // mm
    double advance = 0.0;     // mm along the facing direction
    std::array<std::optional<Vec3>, 2> wrist;  // [left, right], body frame at scale 1
    std::array<double, 2> weight = {0.0, 0.0};
    std::array<std::optional<Vec3>, 2> hand_dir;
    std::array<bool, 2> thumb_up = {false, false};
};

struct Style {
    double tempo = 1.0;
    double amp = 1.0;
    double phase = 0.0;
    double onset = 0.0;
};

enum class Role { Initiator, Responder };

// Emblems: the initiator's right arm carries the sign; the responder acknowledges by
// raising the right hand. Illustrators: arms held forward with the partner attending.
// Regulators: both partners perform the same act in alternation. Adaptor: self-directed
// hand-to-head with no response. Affect displays: both torsos engaged at once.
Gesture template_gesture(int label, Role role, double u, const Style& s) {
    Gesture g;
    const double tau = u * kClipMs / 1000.0;
    const double k = s.tempo;
    const double a = s.amp;
    const double ph = s.phase;
    const bool init = role == Role::Initiator;
    const double ramp_in = smoothstep((u - 0.02 - s.onset) / 0.12);
    const double ack = smoothstep((u - 0.30 - s.onset) / 0.15);
    constexpr int L = 0;
    constexpr int R = 1;

    auto acknowledge = [&](double w) {
        g.wrist[R] = Vec3(-260, 1250, 140);
        g.weight[R] = w;
    };

    switch (label) {
        case 0:  // waving in
            if (init) {
                g.wrist[R] = Vec3(-180, 1180, 330 + 110 * a * std::sin(2 * kPi * 1.5 * k * tau + ph));
                g.weight[R] = ramp_in;
                g.hand_dir[R] = Vec3(0, 0.7, -0.7);
            } else {
                acknowledge(ack);
                g.advance = 180 * smoothstep((u - 0.25) / 0.6);
            }
            break;
        case 1:  // thumbs up
            if (init) {
                g.wrist[R] = Vec3(-120, 1340 + 20 * a * std::sin(2 * kPi * k * tau + ph), 430);
                g.weight[R] = ramp_in;
                g.hand_dir[R] = Vec3(0, 0, 1);
                g.thumb_up[R] = true;
            } else {
                acknowledge(ack);
            }
            break;
        case 2:  // waving
            if (init) {
                g.wrist[R] = Vec3(-320 + 150 * a * std::sin(2 * kPi * 2.0 * k * tau + ph), 1780, 100);
                g.weight[R] = ramp_in;
                g.hand_dir[R] = Vec3(0, 1, 0);
            } else {
                g.wrist[R] = Vec3(-300 + 80 * a * std::sin(2 * kPi * 2.0 * k * tau + ph + 1.0), 1680, 80);
                g.weight[R] = ack;
                g.hand_dir[R] = Vec3(0, 1, 0);
            }
            break;
        case 3:  // pointing
            if (init) {
                g.wrist[R] = Vec3(-470, 1400, 430);
                g.weight[R] = ramp_in;
                g.head_yaw = -25 * ramp_in;
            } else {
                g.head_yaw = 35 * a * ack;
                g.lean = 5 * ack;
            }
            break;
        case 4: {  // showing measurements
            const double sep = 110 + 60 * a * std::sin(2 * kPi * 0.7 * k * tau + ph);
            if (init) {
                g.wrist[L] = Vec3(sep, 1150, 400);
                g.wrist[R] = Vec3(-sep, 1150, 400);
                g.weight = {ramp_in, ramp_in};
                g.hand_dir[L] = Vec3(0, 1, 0.3);
                g.hand_dir[R] = Vec3(0, 1, 0.3);
            } else {
                g.head_pitch = 15 * ack;
                g.lean = 8 * ack;
            }
            break;
        }
        case 5: {  // nodding, in turns
            const double w = init ? window(u, 0.06 + s.onset, 0.44) : window(u, 0.56 + s.onset, 0.94);
            g.head_pitch = w * 18 * a * std::sin(2 * kPi * 2.0 * k * tau + ph);
            break;
        }
        case 6: {  // drawing circles in the air, in turns
            const double w = init ? window(u, 0.06 + s.onset, 0.44) : window(u, 0.56 + s.onset, 0.94);
            const double ang = 2 * kPi * 1.0 * k * tau + ph;
            g.wrist[R] = Vec3(-200 + 150 * a * std::cos(ang), 1350 + 150 * a * std::sin(ang), 380);
            g.weight[R] = w;
            break;
        }
        case 7: {  // holding palms out, in turns
            const double w = init ? window(u, 0.06 + s.onset, 0.44) : window(u, 0.56 + s.onset, 0.94);
            const double push = 30 * a * std::sin(2 * kPi * 0.8 * k * tau + ph);
            g.wrist[L] = Vec3(150, 1300, 430 + push);
            g.wrist[R] = Vec3(-150, 1300, 430 + push);
            g.weight = {w, w};
            g.hand_dir[L] = Vec3(0, 1, 0);
            g.hand_dir[R] = Vec3(0, 1, 0);
            break;
        }
        case 8:  // scratching hair
            if (init) {
                g.wrist[R] = Vec3(-90 + 25 * a * std::sin(2 * kPi * 3.0 * k * tau + ph), 1720, 10);
                g.weight[R] = ramp_in;
                g.hand_dir[R] = Vec3(1, 0.3, 0);
                g.head_pitch = 8 * ramp_in;
                g.head_yaw = 10 * ramp_in;
            }
            break;
        case 9: {  // laughing
            const double on = init ? ramp_in : smoothstep((u - 0.1 - s.onset) / 0.12);
            const double bob = std::abs(std::sin(2 * kPi * 2.5 * k * tau + ph));
            g.lean = on * (8 + 8 * a * bob);
            g.shrug = on * 30 * a * bob;
            g.head_pitch = -12 * on;
            g.wrist[L] = Vec3(120, 1050, 190);
            g.wrist[R] = Vec3(-120, 1050, 190);
            g.weight = {0.7 * on, 0.7 * on};
            break;
        }
        case 10: {  // arm crossing
            const double on = init ? ramp_in : smoothstep((u - 0.25 - s.onset) / 0.15);
            g.wrist[L] = Vec3(-150, 1200, 170);
            g.wrist[R] = Vec3(150, 1180, 190);
            g.weight = {on, on};
            g.lean = -7 * on;
            g.head_pitch = -5 * on;
            break;
        }
        case 11: {  // hugging
            const double close = smoothstep(u / 0.7);
            const double wrap = smoothstep((u - 0.35) / 0.35);
            g.wrist[L] = Vec3(260 - 420 * wrap, 1350, 350 + 180 * wrap);
            g.wrist[R] = Vec3(-260 + 420 * wrap, 1370, 350 + 180 * wrap);
            g.weight = {ramp_in, ramp_in};
            g.lean = 8 * close;
            g.head_yaw = 20 * wrap * (init ? 1 : -1);
            break;
        }
        default:
            break;
    }
    return g;
}

struct ArmIndices {
    int clavicle, shoulder, elbow, wrist, hand, tip, thumb;
    double outward;  // +1 left, -1 right
};

constexpr std::array<ArmIndices, 2> kArms = {{
    {ClavicleLeft, ShoulderLeft, ElbowLeft, WristLeft, HandLeft, HandTipLeft, ThumbLeft, 1.0},
    {ClavicleRight, ShoulderRight, ElbowRight, WristRight, HandRight, HandTipRight, ThumbRight, -1.0},
}};

bool is_upper_body(int j) {
    return j != Pelvis && !(j >= HipLeft && j <= FootRight);
}

/// Two-bone IK: elbow position for a shoulder-to-wrist reach with the elbow pulled toward `pole`.
Vec3 solve_elbow(const Vec3& shoulder, Vec3& wrist, double upper, double fore, const Vec3& pole) {
    Vec3 d = wrist - shoulder;
    double dist = d.norm();
    const double lo = std::abs(upper - fore) + 1e-3;
    const double hi = upper + fore - 1e-3;
    if (dist < 1e-9) {
        d = Vec3(0, -1, 0);
        dist = lo;
    }
    Vec3 dir = d / dist;
    dist = std::clamp(dist, lo, hi);
    wrist = shoulder + dir * dist;
    const double along = (upper * upper - fore * fore + dist * dist) / (2 * dist);
    const double h = std::sqrt(std::max(upper * upper - along * along, 0.0));
    Vec3 perp = pole - dir * pole.dot(dir);
    if (perp.norm() < 1e-9) perp = dir.unitOrthogonal();
    return shoulder + dir * along + perp.normalized() * h;
}

std::array<Vec3, kFullJoints> pose_body(const Rig& rig, double scale, const Gesture& g) {
    std::array<Vec3, kFullJoints> p = rig.base_pose;

    for (int j : {ClavicleLeft, ShoulderLeft, ClavicleRight, ShoulderRight}) p[j].y() += g.shrug;

    for (int side = 0; side < 2; ++side) {
        const auto& arm = kArms[side];
        const Vec3& s = p[arm.shoulder];
        const Vec3& rest_wrist = rig.base_pose[arm.wrist];
        const double upper = (rig.base_pose[arm.elbow] - rig.base_pose[arm.shoulder]).norm();
        const double fore = (rig.base_pose[arm.wrist] - rig.base_pose[arm.elbow]).norm();
        const double hand_len = (rig.base_pose[arm.hand] - rig.base_pose[arm.wrist]).norm();
        const double tip_len = (rig.base_pose[arm.tip] - rig.base_pose[arm.hand]).norm();

        const double w = g.wrist[side] ? g.weight[side] : 0.0;
        Vec3 wrist = rest_wrist;
        if (g.wrist[side]) wrist = (1 - w) * rest_wrist + w * (*g.wrist[side] * scale);
        wrist.y() += g.shrug * (1 - w);
        const Vec3 pole(arm.outward * 0.4, -1.0, -0.5);
        const Vec3 elbow = solve_elbow(s, wrist, upper, fore, pole);

        Vec3 dir = (wrist - elbow).normalized();
        if (g.hand_dir[side]) dir = ((1 - w) * dir + w * g.hand_dir[side]->normalized()).normalized();
        p[arm.elbow] = elbow;
        p[arm.wrist] = wrist;
        p[arm.hand] = wrist + dir * hand_len;
        p[arm.tip] = p[arm.hand] + dir * tip_len;
        Vec3 thumb_off = g.thumb_up[side] ? Vec3(0, 60 * scale, 0) : Vec3(-arm.outward * 25 * scale, 0, 15 * scale);
        p[arm.thumb] = wrist + dir * (0.6 * hand_len) + thumb_off * (g.thumb_up[side] ? w : 1.0);
    }

    const Vec3 neck = p[Neck];
    for (int j = Head; j < kFullJoints; ++j) {
        p[j] = neck + rotate_y(rotate_x(p[j] - neck, g.head_pitch), g.head_yaw);
    }
    const Vec3 pelvis = p[Pelvis];
    for (int j = 0; j < kFullJoints; ++j) {
        if (is_upper_body(j)) p[j] = pelvis + rotate_x(p[j] - pelvis, g.lean);
    }
    for (auto& q : p) q.z() += g.advance;
    return p;
}

struct PairTraits {
    std::array<double, 2> scale;
    double rest_distance;
    double center_x;
    double center_z;
    double turn_sign;
};

PairTraits pair_traits(PairIdentity pair) {
    std::mt19937_64 rng(splitmix64(0x5eedULL * 131 + static_cast<std::uint64_t>(pair.location) * 1009 +
                                   static_cast<std::uint64_t>(pair.pair_index)));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    PairTraits t{};
    t.scale = {0.92 + 0.16 * U(rng), 0.92 + 0.16 * U(rng)};
    t.rest_distance = 1000 + 400 * U(rng);
    t.center_x = -250 + 500 * U(rng);
    t.center_z = 2300 + 400 * U(rng);
    t.turn_sign = U(rng) < 0.5 ? -1.0 : 1.0;
    return t;
}

}  // namespace

Rig Rig::standard(double scale) {
    Rig rig;
    auto& b = rig.base_pose;
    auto set = [&](int j, double x, double y, double z) { b[j] = Vec3(x, y, z) * scale; };
    set(Pelvis, 0, 950, 0);
    set(SpineNavel, 0, 1130, 0);
    set(SpineChest, 0, 1320, 0);
    set(Neck, 0, 1480, 0);
    for (double side : {1.0, -1.0}) {
        const auto& arm = kArms[side > 0 ? 0 : 1];
        set(arm.clavicle, side * 40, 1440, 0);
        set(arm.shoulder, side * 180, 1420, 0);
        set(arm.elbow, side * 200, 1130, -10);
        set(arm.wrist, side * 210, 880, 0);
        set(arm.hand, side * 210, 800, 0);
        set(arm.tip, side * 210, 720, 0);
        set(arm.thumb, side * 185, 810, 25);
    }
    set(HipLeft, 100, 930, 0);
    set(KneeLeft, 100, 500, 10);
    set(AnkleLeft, 100, 80, 0);
    set(FootLeft, 100, 20, 130);
    set(HipRight, -100, 930, 0);
    set(KneeRight, -100, 500, 10);
    set(AnkleRight, -100, 80, 0);
    set(FootRight, -100, 20, 130);
    set(Head, 0, 1600, 10);
    set(Nose, 0, 1600, 100);
    set(EyeLeft, 35, 1640, 80);
    set(EarLeft, 75, 1610, 0);
    set(EyeRight, -35, 1640, 80);
    set(EarRight, -75, 1610, 0);

    const auto& parents = full_joint_parents();
    for (int j = 0; j < kFullJoints; ++j) {
        if (parents[j] < 0) continue;
        rig.bones.emplace_back(parents[j], j);
        rig.segment_lengths.push_back((b[j] - b[parents[j]]).norm());
    }
    return rig;
}

double hug_distance_fraction(double u) noexcept {
    return 1.0 - 0.62 * smoothstep(u / 0.7);
}

SkeletonSequence generate_sample(ActivityLabel label, PairIdentity pair, double orientation_deg,
                                 std::uint64_t seed, const SampleOptions& options) {
    const PairTraits traits = pair_traits(pair);
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::array<Style, 2> style;
    for (auto& s : style) {
        s.tempo = 0.85 + 0.3 * U(rng);
        s.amp = 0.8 + 0.4 * U(rng);
        s.phase = 2 * kPi * U(rng);
        s.onset = 0.05 * U(rng);
    }

    std::vector<std::int64_t> stamps(kFramesPerSample);
    for (int t = 0; t < kFramesPerSample; ++t) {
        stamps[t] = options.t_start + std::llround(t * kClipMs / (kFramesPerSample - 1));
    }
    SkeletonSequence seq(JointLayout::Full32, std::move(stamps));

    const double theta = orientation_deg * kPi / 180.0;
    const Vec3 axis(std::cos(theta), 0, std::sin(theta));
    const Vec3 center(traits.center_x, 0, traits.center_z);
    const std::array<Rig, 2> rigs = {Rig::standard(traits.scale[0]), Rig::standard(traits.scale[1])};

    for (int t = 0; t < kFramesPerSample; ++t) {
        const double u = static_cast<double>(t) / (kFramesPerSample - 1);
        double gap = traits.rest_distance;
        if (label.value() == 11) gap *= hug_distance_fraction(u);
        for (int m = 0; m < kNumSubjects; ++m) {
            const Role role = m == 0 ? Role::Initiator : Role::Responder;
            const Gesture g = template_gesture(label.value(), role, u, style[m]);
            auto body = pose_body(rigs[m], traits.scale[m], g);
            const Vec3 forward = m == 0 ? axis : Vec3(-axis);
            const Vec3 left(forward.z(), 0, -forward.x());
            const Vec3 origin = center - forward * (gap / 2);
            for (int v = 0; v < kFullJoints; ++v) {
                const Vec3& q = body[v];
                const Vec3 world = origin + left * q.x() + Vec3::UnitY() * q.y() + forward * q.z();
                seq.at(m, t, v, 0) = world.x();
                seq.at(m, t, v, 1) = kCameraHeight - world.y();
                seq.at(m, t, v, 2) = world.z();
            }
        }
    }

    if (options.occluded) {
        // The farther subject's joints that fall behind the nearer subject's silhouette read
        // as if they lay close to the occluder's depth.
        for (int t = 0; t < kFramesPerSample; ++t) {
            const int near = seq.at(0, t, Pelvis, 2) <= seq.at(1, t, Pelvis, 2) ? 0 : 1;
            const int far = 1 - near;
            const double zn = seq.at(near, t, Pelvis, 2);
            const double xn = seq.at(near, t, Pelvis, 0) / zn;
            const double half_width = 250.0 / zn;
            for (int v = 0; v < kFullJoints; ++v) {
                const double z = seq.at(far, t, v, 2);
                if (std::abs(seq.at(far, t, v, 0) / z - xn) >= half_width) continue;
                const double z_new = z + 0.7 * ((zn + 100.0) - z);
                const double ratio = z_new / z;
                seq.at(far, t, v, 0) *= ratio;
                seq.at(far, t, v, 1) *= ratio;
                seq.at(far, t, v, 2) = z_new;
            }
        }
    }

    if (options.noise_std > 0) {
        std::normal_distribution<double> N(0.0, options.noise_std);
        for (double& x : seq.coords()) x += N(rng);
    }
    return seq;
}

void SynthConfig::validate() const {
    if (labels.empty()) throw ContractError("synth config: labels is empty");
    std::set<int> seen;
    for (int l : labels) {
        if (l < 0 || l >= kNumActivities) throw ContractError("synth config: label out of range");
        if (!seen.insert(l).second) throw ContractError("synth config: duplicate label");
    }
    if (pairs_per_location < 1 || pairs_per_location > kMaxPairIndex) {
        throw ContractError("synth config: pairs_per_location must be in [1, 10]");
    }
    if (repetitions < 1) throw ContractError("synth config: repetitions must be >= 1");
    if (locations.empty()) throw ContractError("synth config: locations is empty");
    if (!(noise_std >= 0) || !std::isfinite(noise_std)) throw ContractError("synth config: noise_std < 0");
    if (!std::isfinite(rotation_step)) throw ContractError("synth config: rotation_step not finite");
    if (!(occlusion_rate >= 0 && occlusion_rate <= 1)) {
        throw ContractError("synth config: occlusion_rate outside [0, 1]");
    }
    // Clips are 3.3 s apart in one recording; keep names inside the next activity's window.
    if (repetitions > 40) throw ContractError("synth config: repetitions must be <= 40");
}

std::size_t SynthConfig::sample_count() const noexcept {
    return labels.size() * locations.size() * static_cast<std::size_t>(pairs_per_location) *
           static_cast<std::size_t>(repetitions);
}

nlohmann::json config_to_json(const SynthConfig& c) {
    auto locs = nlohmann::json::array();
    for (auto l : c.locations) locs.push_back(std::string(location_text(l)));
    return {{"labels", c.labels},
            {"pairs_per_location", c.pairs_per_location},
            {"repetitions", c.repetitions},
            {"locations", locs},
            {"noise_std", c.noise_std},
            {"rotation_step", c.rotation_step},
            {"occlusion_rate", c.occlusion_rate},
            {"seed", c.seed},
            {"image_placeholders", c.image_placeholders}};
}

SynthConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("synth config: expected an object");
    SynthConfig c;
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "labels") c.labels = val.get<std::vector<int>>();
            else if (key == "pairs_per_location") c.pairs_per_location = val.get<int>();
            else if (key == "repetitions") c.repetitions = val.get<int>();
            else if (key == "locations") {
                c.locations.clear();
                for (const auto& l : val) c.locations.push_back(parse_location(l.get<std::string>()));
            } else if (key == "noise_std") c.noise_std = val.get<double>();
            else if (key == "rotation_step") c.rotation_step = val.get<double>();
            else if (key == "occlusion_rate") c.occlusion_rate = val.get<double>();
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "image_placeholders") c.image_placeholders = val.get<bool>();
            else throw ParseError("synth config: unknown key \"" + key + "\"");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("synth config: bad value for \"" + key + "\": " + e.what());
        }
    }
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw ParseError(e.what());
    }
    return c;
}

double repetition_orientation(const SynthConfig& c, PairIdentity pair, int rep) {
    const double deg = pair_traits(pair).turn_sign * c.rotation_step * rep;
    double wrapped = std::fmod(deg, 360.0);
    if (wrapped < 0) wrapped += 360.0;
    return wrapped;
}

SampleName repetition_name(ActivityLabel label, PairIdentity pair, int rep) {
    SampleName n;
    n.location = pair.location;
    n.activity_index = label.value() + 1;
    n.pair_index = pair.pair_index;
    n.t_start = kRecordingStartMs + label.value() * (40 * kRepetitionStrideMs + kBreakMs) +
                rep * kRepetitionStrideMs;
    n.t_end = n.t_start + static_cast<std::int64_t>(kClipMs);
    return n;
}

namespace {

std::uint64_t sample_seed(std::uint64_t seed, const std::string& name, std::uint64_t salt) {
    return splitmix64(splitmix64(seed ^ salt) ^ fnv1a(name));
}

}  // namespace

bool is_occluded(const SynthConfig& c, const SampleName& name) {
    const auto h = sample_seed(c.seed, format_sample_name(name), 0x0cc1ULL);
    return static_cast<double>(h >> 11) * 0x1.0p-53 < c.occlusion_rate;
}

std::vector<GeneratedSample> generate_samples(const SynthConfig& config) {
    config.validate();
    std::vector<GeneratedSample> out;
    out.reserve(config.sample_count());
    for (auto loc : config.locations) {
        for (int l : config.labels) {
            const ActivityLabel label{l};
            for (int p = 1; p <= config.pairs_per_location; ++p) {
                const PairIdentity pair{loc, p};
                for (int rep = 0; rep < config.repetitions; ++rep) {
                    const auto name = repetition_name(label, pair, rep);
                    SampleOptions opt;
                    opt.noise_std = config.noise_std;
                    opt.occluded = is_occluded(config, name);
                    opt.t_start = name.t_start;
                    const auto seed = sample_seed(config.seed, format_sample_name(name), 0);
                    out.push_back({name, generate_sample(label, pair,
                                                         repetition_orientation(config, pair, rep),
                                                         seed, opt)});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

AnnotationContainer generate_container(const SynthConfig& config, const SplitRule& split) {
    std::vector<std::pair<SampleName, SkeletonSequence>> reduced;
    for (auto& s : generate_samples(config)) reduced.emplace_back(s.name, reduce_joints(s.sequence));
    return build_annotation_container(reduced, split);
}

AnnotationContainer generate_dataset(const SynthConfig& config, const std::filesystem::path& root,
                                     const SplitRule& split) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw IoError("cannot create dataset root " + root.string() + ": " + ec.message());
    std::vector<std::pair<SampleName, SkeletonSequence>> reduced;
    for (auto& s : generate_samples(config)) {
        write_joints_sample(root, s.name, s.sequence);
        if (config.image_placeholders) {
            for (auto m : {Modality::Rgb, Modality::Depth, Modality::Ir}) {
                write_image_placeholders(root, m, s.name);
            }
        }
        reduced.emplace_back(s.name, reduce_joints(s.sequence));
    }
    return build_annotation_container(reduced, split);
}

std::vector<double> canonical_trajectory(const KeypointArray& k) { return canonicalize_dyad(k).values; }

double nearest_centroid_baseline(const AnnotationContainer& container,
                                 const std::vector<std::string>& train_names,
                                 const std::vector<std::string>& test_names) {
    if (train_names.empty() || test_names.empty()) {
        throw ContractError("nearest_centroid_baseline: empty name list");
    }
    std::map<std::string, const SampleRecord*> index;
    for (const auto& r : container.annotation) index[r.frame_dir] = &r;
    auto lookup = [&](const std::string& n) -> const SampleRecord& {
        auto it = index.find(n);
        if (it == index.end()) throw ContractError("nearest_centroid_baseline: unknown sample " + n);
        return *it->second;
    };
    std::set<std::string> train_set(train_names.begin(), train_names.end());
    for (const auto& n : test_names) {
        if (train_set.contains(n)) throw ContractError("nearest_centroid_baseline: train/test overlap " + n);
    }

    std::map<int, std::vector<double>> sums;
    std::map<int, int> counts;
    for (const auto& n : train_names) {
        const auto& r = lookup(n);
        auto traj = canonical_trajectory(r.keypoint);
        auto& s = sums[r.label.value()];
        if (s.empty()) s.assign(traj.size(), 0.0);
        if (s.size() != traj.size()) throw ContractError("nearest_centroid_baseline: ragged trajectories");
        for (std::size_t i = 0; i < traj.size(); ++i) s[i] += traj[i];
        ++counts[r.label.value()];
    }
    for (auto& [label, s] : sums) {
        for (double& x : s) x /= counts[label];
    }

    int correct = 0;
    for (const auto& n : test_names) {
        const auto& r = lookup(n);
        if (!sums.contains(r.label.value())) {
            throw ContractError("nearest_centroid_baseline: class " + std::to_string(r.label.value()) +
                                " has no training samples");
        }
        const auto traj = canonical_trajectory(r.keypoint);
        int best = -1;
        double best_d = 0.0;
        for (const auto& [label, centroid] : sums) {
            if (centroid.size() != traj.size()) continue;
            double d = 0.0;
            for (std::size_t i = 0; i < traj.size(); ++i) d += (traj[i] - centroid[i]) * (traj[i] - centroid[i]);
            if (best < 0 || d < best_d) {
                best = label;
                best_d = d;
            }
        }
        if (best == r.label.value()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_names.size());
}

}  // namespace duet::synth
