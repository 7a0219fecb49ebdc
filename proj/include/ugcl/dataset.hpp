#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ugcl/errors.hpp"
#include "ugcl/geometry.hpp"

namespace ugcl {

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Interval {
    double lo = 0.0, hi = 0.0;

    double width() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

// f = (W/2) / tan(fov/2), fov in degrees.
inline double focal_from_fov(double fov_deg, int image_width) {
    return (image_width / 2.0) / std::tan(deg2rad(fov_deg) / 2.0);
}

// Sampling intervals for every generated quantity plus the image geometry.
// Angles are stored in radians; fov is a degree quantity by definition.
struct ConfigRange {
    Interval fov_deg{60.0, 100.0};
    Interval pitch_rad{deg2rad(-15.0), deg2rad(15.0)};
    Interval px{60.0, 90.0};
    Interval py{60.0, 90.0};
    Interval baseline{0.2, 1.0};
    Interval disparity{0.2, 40.0};
    Interval tx{-2.0, 10.0};
    Interval ty{-2.0, 10.0};
    Interval tz{-2.0, 10.0};
    Interval depth{4.0, 50.0};
    // World-space scene volume the generator draws points from; sized so every
    // camera in the ranges above sees a usable slice of it.
    Interval scene_x{6.0, 48.0};
    Interval scene_y{-6.0, 14.0};
    Interval scene_z{-10.0, 18.0};
    // Landmark mode: points come from a fixed lattice over scene_x x scene_z
    // (at the scene_y draw), jittered per sample, instead of the full volume.
    bool scene_grid = false;
    double scene_jitter = 0.2;
    int image_width = 150;
    int image_height = 150;
    int points_per_sample = 16;

    // Focal interval induced by the fov interval (wider fov -> shorter focal).
    Interval focal() const {
        return {focal_from_fov(fov_deg.hi, image_width), focal_from_fov(fov_deg.lo, image_width)};
    }

    // Interval for parameter k in CameraParams order; used for normalization
    // and for squashing regressor outputs.
    Interval param_interval(int k) const {
        switch (k) {
            case 0: case 1: return focal();
            case 2: return px;
            case 3: return py;
            case 4: return baseline;
            case 5: return disparity;
            case 6: return pitch_rad;
            case 7: return tx;
            case 8: return ty;
            case 9: return tz;
            default: throw UnknownParameter();
        }
    }
};

// The desk-scale training benchmark: a fleet calibration station. One rig
// model (fixed focal, baseline, mounting pose) parked in front of a landmark
// lattice on the ground plane; what varies across vehicles is the principal
// point plus the per-sample landmark jitter. Pitch is exactly zero, so V_x
// and V_y sit at infinity and are flag-excluded while V_z degrades to direct
// principal-point supervision; the divisors (cos pitch, t_z) stay well away
// from zero. In this regime every varying quantity is observable from the
// correspondences, which is what the training criteria measure.
inline ConfigRange benchmark_range() {
    ConfigRange r;
    r.fov_deg = {80.0, 80.0};
    r.pitch_rad = {0.0, 0.0};
    r.px = {55.0, 95.0};
    r.py = {55.0, 95.0};
    r.baseline = {0.54, 0.54};
    r.tx = {-15.0, -15.0};
    r.ty = {1.6, 1.6};
    r.tz = {6.0, 6.0};
    r.scene_x = {0.0, 30.0};
    r.scene_y = {0.0, 0.0};
    r.scene_z = {3.0, 9.0};
    r.scene_grid = true;
    return r;
}

// Continuous ranges for the per-sample recovery benchmark: the default ranges
// restricted so the vanishing-point and world-center divisors are
// well-conditioned (|pitch| and t_z bounded away from zero), which keeps the
// loss poles out of the recovery basin.
inline ConfigRange recovery_range() {
    ConfigRange r;
    r.pitch_rad = {deg2rad(3.0), deg2rad(15.0)};
    r.tz = {2.0, 10.0};
    return r;
}

inline void validate_range(const ConfigRange& r) {
    const Interval* all[] = {&r.fov_deg, &r.pitch_rad, &r.px,      &r.py,      &r.baseline,
                             &r.disparity, &r.tx,      &r.ty,      &r.tz,      &r.depth,
                             &r.scene_x, &r.scene_y,   &r.scene_z};
    for (const Interval* iv : all)
        if (!(iv->lo <= iv->hi)) throw EmptyRange();
    if (r.image_width < 1 || r.image_height < 1 || r.points_per_sample < 1)
        throw EmptyRange("image size and point count must be at least 1");
    if (!(r.fov_deg.lo > 0.0 && r.fov_deg.hi < 180.0))
        throw EmptyRange("fov must lie in (0, 180) degrees");
    if (!(r.disparity.lo > 0.0)) throw EmptyRange("disparity bound must be positive");
    if (!(r.depth.lo > 0.0)) throw EmptyRange("depth bound must be positive");
    if (!(r.baseline.lo > 0.0)) throw EmptyRange("baseline bound must be positive");
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream generator: (seed, stream) fully determines the
// sequence, independent of how many other streams exist. Uniform doubles are
// derived from the raw 64-bit output so the values do not depend on any
// library distribution implementation.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        const std::uint64_t a = splitmix64(s);
        s ^= 0x6a09e667f3bcc909ULL + stream;
        const std::uint64_t b = splitmix64(s);
        eng_.seed(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
    }

    std::uint64_t next_u64() { return eng_(); }

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double uniform(const Interval& iv) { return uniform(iv.lo, iv.hi); }

  private:
    std::mt19937_64 eng_;
};

// One stereo calibration sample at correspondence level: N world points, the
// two image tracks, per-point disparities, and every ground-truth target the
// losses compare against.
struct Sample {
    std::int64_t id = 0;
    CameraParams gt{};
    std::vector<Vec3<double>> points3d;
    std::vector<Vec2<double>> left, right;
    std::vector<double> disparity;
    ConstraintTargets gt_targets{};
    std::vector<Vec3<double>> gt_recon;  // reconstruct_3d(gt, left_i) with the scalar gt.d

    int n_points() const { return static_cast<int>(left.size()); }
};

// Draws one camera configuration. fx = fy from the fov draw; d is a
// placeholder until generate_sample records the realized mean disparity.
inline CameraParams sample_config(const ConfigRange& range, Rng& rng) {
    validate_range(range);
    CameraParams p;
    const double f = focal_from_fov(rng.uniform(range.fov_deg), range.image_width);
    p.fx = f;
    p.fy = f;
    p.px = rng.uniform(range.px);
    p.py = rng.uniform(range.py);
    p.b = rng.uniform(range.baseline);
    p.theta_p = rng.uniform(range.pitch_rad);
    p.tx = rng.uniform(range.tx);
    p.ty = rng.uniform(range.ty);
    p.tz = rng.uniform(range.tz);
    p.d = range.disparity.midpoint();
    return p;
}

inline std::vector<CameraParams> sample_configs(const ConfigRange& range, std::int64_t count,
                                                std::uint64_t seed) {
    if (count < 1) throw EmptyRange("config count must be at least 1");
    std::vector<CameraParams> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(2 * i));
        out.push_back(sample_config(range, rng));
    }
    return out;
}

// Samples N scene points for the given camera: draw a world point from the
// scene volume (or the jittered landmark lattice), project it through the
// generator's stereo forward model, and keep it only if the depth and
// disparity bounds hold and both observations land in frame. Points are
// emitted sorted by the left observation so the correspondence layout is
// canonical.
inline Sample generate_sample(const CameraParams& cfg, const ConfigRange& range, Rng& rng,
                              std::int64_t id = 0) {
    validate_range(range);
    const int n = range.points_per_sample;
    const double w = range.image_width;
    const double h = range.image_height;

    Sample s;
    s.id = id;
    s.gt = cfg;

    const int grid_cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    auto lattice_point = [&](int i) {
        const int row = i / grid_cols;
        const int col = i % grid_cols;
        const int rows = (n + grid_cols - 1) / grid_cols;
        const double fx = rows > 1 ? static_cast<double>(row) / (rows - 1) : 0.5;
        const double fz = grid_cols > 1 ? static_cast<double>(col) / (grid_cols - 1) : 0.5;
        return Vec2<double>{range.scene_x.lo + fx * range.scene_x.width(),
                            range.scene_z.lo + fz * range.scene_z.width()};
    };

    struct Draw {
        Vec3<double> world;
        Vec2<double> left;
        double disp;
    };
    std::vector<Draw> draws;
    draws.reserve(static_cast<std::size_t>(n));
    int rejections = 0;
    while (static_cast<int>(draws.size()) < n) {
        Vec3<double> world;
        if (range.scene_grid) {
            const Vec2<double> base = lattice_point(static_cast<int>(draws.size()));
            const double j = range.scene_jitter;
            world = {base.x + rng.uniform(-j, j), rng.uniform(range.scene_y),
                     base.y + rng.uniform(-j, j)};
        } else {
            world = {rng.uniform(range.scene_x), rng.uniform(range.scene_y),
                     rng.uniform(range.scene_z)};
        }
        const Vec3<double> cam = camera_frame_from_world(cfg, world);
        bool ok = range.depth.contains(cam.x);
        double disp = 0.0;
        Vec2<double> left{};
        if (ok) {
            disp = cfg.fx * cfg.b / cam.x;
            left = {cfg.px - cfg.fx * cam.y / cam.x, cfg.py - cfg.fy * cam.z / cam.x};
            ok = range.disparity.contains(disp) && left.x >= 0.0 && left.x <= w &&
                 left.y >= 0.0 && left.y <= h && left.x - disp >= 0.0;
        }
        if (!ok) {
            if (++rejections >= 10000) throw Unfillable();
            continue;
        }
        draws.push_back({world, left, disp});
    }
    std::sort(draws.begin(), draws.end(), [](const Draw& a, const Draw& b) {
        if (a.left.x != b.left.x) return a.left.x < b.left.x;
        if (a.left.y != b.left.y) return a.left.y < b.left.y;
        return a.disp < b.disp;
    });

    double disparity_sum = 0.0;
    for (const Draw& dr : draws) {
        s.points3d.push_back(dr.world);
        s.left.push_back(dr.left);
        s.right.push_back({dr.left.x - dr.disp, dr.left.y});
        s.disparity.push_back(dr.disp);
        disparity_sum += dr.disp;
    }
    s.gt.d = disparity_sum / n;

    s.gt_targets = constraint_targets(compose_projection(s.gt));
    s.gt_recon.reserve(s.left.size());
    for (const Vec2<double>& obs : s.left) s.gt_recon.push_back(reconstruct_3d(s.gt, obs));
    return s;
}

inline std::vector<Sample> make_dataset(const ConfigRange& range, std::int64_t count,
                                        std::uint64_t seed) {
    if (count < 1) throw EmptyRange("sample count must be at least 1");
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        Rng cfg_rng(seed, static_cast<std::uint64_t>(2 * i));
        Rng point_rng(seed, static_cast<std::uint64_t>(2 * i + 1));
        samples.push_back(generate_sample(sample_config(range, cfg_rng), range, point_rng, i));
    }
    return samples;
}

// --- serialization ---------------------------------------------------------
//
// JSON-Lines: a header line, one line per sample, and a trailing checksum line
// holding the FNV-1a 64 of every preceding byte. Numbers are written with 17
// significant digits so the round trip is lossless.

struct Fnv1a64 {
    std::uint64_t hash = 14695981039346656037ULL;

    void update(std::string_view bytes) {
        for (const char c : bytes) {
            hash ^= static_cast<unsigned char>(c);
            hash *= 1099511628211ULL;
        }
    }
};

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

inline void append_vec2(std::string& out, const Vec2<double>& v) {
    out += '[';
    append_double(out, v.x);
    out += ',';
    append_double(out, v.y);
    out += ']';
}

inline void append_vec3(std::string& out, const Vec3<double>& v) {
    out += '[';
    append_double(out, v.x);
    out += ',';
    append_double(out, v.y);
    out += ',';
    append_double(out, v.z);
    out += ']';
}

inline void append_flagged(std::string& out, const FlaggedPoint<double>& p) {
    if (p.finite)
        append_vec2(out, p.point);
    else
        out += "null";
}

inline void append_interval(std::string& out, const char* key, const Interval& iv) {
    out += '"';
    out += key;
    out += "\":[";
    append_double(out, iv.lo);
    out += ',';
    append_double(out, iv.hi);
    out += ']';
}

}  // namespace detail

inline std::string range_to_json(const ConfigRange& r) {
    using detail::append_interval;
    std::string out = "{";
    append_interval(out, "fov_deg", r.fov_deg);
    out += ',';
    append_interval(out, "pitch_rad", r.pitch_rad);
    out += ',';
    append_interval(out, "px", r.px);
    out += ',';
    append_interval(out, "py", r.py);
    out += ',';
    append_interval(out, "baseline", r.baseline);
    out += ',';
    append_interval(out, "disparity", r.disparity);
    out += ',';
    append_interval(out, "tx", r.tx);
    out += ',';
    append_interval(out, "ty", r.ty);
    out += ',';
    append_interval(out, "tz", r.tz);
    out += ',';
    append_interval(out, "depth", r.depth);
    out += ',';
    append_interval(out, "scene_x", r.scene_x);
    out += ',';
    append_interval(out, "scene_y", r.scene_y);
    out += ',';
    append_interval(out, "scene_z", r.scene_z);
    out += ",\"scene_grid\":";
    out += r.scene_grid ? "true" : "false";
    out += ",\"scene_jitter\":";
    detail::append_double(out, r.scene_jitter);
    out += ",\"image_width\":" + std::to_string(r.image_width);
    out += ",\"image_height\":" + std::to_string(r.image_height);
    out += ",\"points_per_sample\":" + std::to_string(r.points_per_sample);
    out += '}';
    return out;
}

inline ConfigRange range_from_json(const nlohmann::json& j) {
    ConfigRange r;
    auto iv = [&](const char* key, Interval def) {
        if (!j.contains(key)) return def;
        const auto& a = j.at(key);
        return Interval{a.at(0).get<double>(), a.at(1).get<double>()};
    };
    r.fov_deg = iv("fov_deg", r.fov_deg);
    r.pitch_rad = iv("pitch_rad", r.pitch_rad);
    r.px = iv("px", r.px);
    r.py = iv("py", r.py);
    r.baseline = iv("baseline", r.baseline);
    r.disparity = iv("disparity", r.disparity);
    r.tx = iv("tx", r.tx);
    r.ty = iv("ty", r.ty);
    r.tz = iv("tz", r.tz);
    r.depth = iv("depth", r.depth);
    r.scene_x = iv("scene_x", r.scene_x);
    r.scene_y = iv("scene_y", r.scene_y);
    r.scene_z = iv("scene_z", r.scene_z);
    r.scene_grid = j.value("scene_grid", r.scene_grid);
    r.scene_jitter = j.value("scene_jitter", r.scene_jitter);
    r.image_width = j.value("image_width", r.image_width);
    r.image_height = j.value("image_height", r.image_height);
    r.points_per_sample = j.value("points_per_sample", r.points_per_sample);
    validate_range(r);
    return r;
}

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetHeader {
    int version = kDatasetSchemaVersion;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    ConfigRange range;
};

inline std::string sample_to_json(const Sample& s) {
    using namespace detail;
    std::string out = "{\"id\":" + std::to_string(s.id) + ",\"gt\":[";
    const auto params = s.gt.as_array();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ',';
        append_double(out, params[i]);
    }
    out += "],\"p3\":[";
    for (std::size_t i = 0; i < s.points3d.size(); ++i) {
        if (i) out += ',';
        append_vec3(out, s.points3d[i]);
    }
    out += "],\"left\":[";
    for (std::size_t i = 0; i < s.left.size(); ++i) {
        if (i) out += ',';
        append_vec2(out, s.left[i]);
    }
    out += "],\"right\":[";
    for (std::size_t i = 0; i < s.right.size(); ++i) {
        if (i) out += ',';
        append_vec2(out, s.right[i]);
    }
    out += "],\"disp\":[";
    for (std::size_t i = 0; i < s.disparity.size(); ++i) {
        if (i) out += ',';
        append_double(out, s.disparity[i]);
    }
    out += "],\"vx\":";
    append_flagged(out, s.gt_targets.vx);
    out += ",\"vy\":";
    append_flagged(out, s.gt_targets.vy);
    out += ",\"vz\":";
    append_flagged(out, s.gt_targets.vz);
    out += ",\"wc\":";
    append_flagged(out, s.gt_targets.wc);
    out += ",\"recon\":[";
    for (std::size_t i = 0; i < s.gt_recon.size(); ++i) {
        if (i) out += ',';
        append_vec3(out, s.gt_recon[i]);
    }
    out += "]}";
    return out;
}

inline Sample sample_from_json(const nlohmann::json& j) {
    Sample s;
    s.id = j.at("id").get<std::int64_t>();
    std::array<double, 10> params{};
    for (int i = 0; i < 10; ++i) params[static_cast<std::size_t>(i)] = j.at("gt").at(i).get<double>();
    s.gt = CameraParams::from_array(params);
    auto vec3s = [](const nlohmann::json& a) {
        std::vector<Vec3<double>> out;
        out.reserve(a.size());
        for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
        return out;
    };
    auto vec2s = [](const nlohmann::json& a) {
        std::vector<Vec2<double>> out;
        out.reserve(a.size());
        for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        return out;
    };
    auto flagged = [](const nlohmann::json& v) {
        if (v.is_null()) return FlaggedPoint<double>{};
        return FlaggedPoint<double>{{v.at(0).get<double>(), v.at(1).get<double>()}, true};
    };
    s.points3d = vec3s(j.at("p3"));
    s.left = vec2s(j.at("left"));
    s.right = vec2s(j.at("right"));
    s.disparity = j.at("disp").get<std::vector<double>>();
    s.gt_targets.vx = flagged(j.at("vx"));
    s.gt_targets.vy = flagged(j.at("vy"));
    s.gt_targets.vz = flagged(j.at("vz"));
    s.gt_targets.wc = flagged(j.at("wc"));
    s.gt_recon = vec3s(j.at("recon"));
    return s;
}

inline std::string header_to_json(const DatasetHeader& h) {
    std::string out = "{\"schema\":\"ugcl-dataset\",\"version\":" + std::to_string(h.version);
    out += ",\"count\":" + std::to_string(h.count);
    out += ",\"seed\":" + std::to_string(h.seed);
    out += ",\"range\":" + range_to_json(h.range);
    out += '}';
    return out;
}

// Returns the checksum of everything written (hex), which `generate` echoes.
inline std::string write_dataset(const std::string& path, const std::vector<Sample>& samples,
                                 const ConfigRange& range, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    Fnv1a64 fnv;
    auto emit = [&](const std::string& line) {
        fnv.update(line);
        fnv.update("\n");
        out << line << '\n';
    };
    DatasetHeader h;
    h.count = samples.size();
    h.seed = seed;
    h.range = range;
    emit(header_to_json(h));
    for (const Sample& s : samples) emit(sample_to_json(s));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv.hash));
    out << "{\"fnv1a64\":\"" << buf << "\"}\n";
    if (!out) throw IoError("write failed: " + path);
    return buf;
}

// Streams samples through `fn` in constant memory. The checksum trailer is
// verified before returning; integrity failures throw, so callers must treat
// the pass as tentative until the call completes.
inline DatasetHeader for_each_sample(const std::string& path,
                                     const std::function<void(const Sample&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    Fnv1a64 fnv;
    std::string line;
    bool have_header = false;
    bool have_trailer = false;
    DatasetHeader header;
    std::uint64_t sample_lines = 0;
    std::uint64_t stored_hash = 0;
    while (std::getline(in, line)) {
        if (have_trailer) throw ChecksumMismatch("data after checksum trailer");
        if (line.rfind("{\"fnv1a64\"", 0) == 0) {
            try {
                const nlohmann::json j = nlohmann::json::parse(line);
                stored_hash = std::stoull(j.at("fnv1a64").get<std::string>(), nullptr, 16);
            } catch (const ChecksumMismatch&) {
                throw;
            } catch (...) {
                throw ChecksumMismatch("malformed checksum trailer");
            }
            have_trailer = true;
            continue;
        }
        fnv.update(line);
        fnv.update("\n");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw ChecksumMismatch("malformed line (truncated file?)");
        }
        if (!have_header) {
            if (j.value("schema", "") != "ugcl-dataset" ||
                j.value("version", -1) != kDatasetSchemaVersion)
                throw SchemaVersionMismatch();
            header.version = j.at("version").get<int>();
            header.count = j.at("count").get<std::uint64_t>();
            header.seed = j.at("seed").get<std::uint64_t>();
            header.range = range_from_json(j.at("range"));
            have_header = true;
            continue;
        }
        ++sample_lines;
        if (fn) fn(sample_from_json(j));
    }
    if (!have_header) throw SchemaVersionMismatch("missing header line");
    if (!have_trailer) throw ChecksumMismatch("missing checksum trailer (truncated file?)");
    if (fnv.hash != stored_hash) throw ChecksumMismatch();
    if (sample_lines != header.count) throw ChecksumMismatch("sample count disagrees with header");
    return header;
}

struct Dataset {
    DatasetHeader header;
    std::vector<Sample> samples;
};

inline Dataset read_dataset(const std::string& path) {
    Dataset d;
    d.header = for_each_sample(path, [&](const Sample& s) { d.samples.push_back(s); });
    return d;
}

}  // namespace ugcl
