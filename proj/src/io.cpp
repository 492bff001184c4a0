#include "mgp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace mgp::io {

using Json = nlohmann::ordered_json;

namespace {

/// Shape errors inside a document; translated to the caller's error type.
class Malformed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message)
{
    if (!ok) throw Malformed(message);
}

void allow_keys(const Json& j, std::initializer_list<std::string_view> keys, const std::string& where)
{
    require(j.is_object(), where + " must be a JSON object");
    for (const auto& item : j.items()) {
        const bool known = std::find(keys.begin(), keys.end(), item.key()) != keys.end();
        require(known, "unknown key '" + item.key() + "' in " + where);
    }
}

double number(const Json& j, const std::string& where)
{
    require(j.is_number(), where + " must be a number");
    return j.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where)
{
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

int integer(const Json& j, const std::string& where)
{
    require(j.is_number_integer(), where + " must be an integer");
    return j.get<int>();
}

int integer_or(const Json& j, const char* key, int fallback, const std::string& where)
{
    return j.contains(key) ? integer(j.at(key), where + "." + key) : fallback;
}

bool boolean_or(const Json& j, const char* key, bool fallback, const std::string& where)
{
    if (!j.contains(key)) return fallback;
    require(j.at(key).is_boolean(), where + "." + key + " must be true or false");
    return j.at(key).get<bool>();
}

std::string string(const Json& j, const std::string& where)
{
    require(j.is_string(), where + " must be a string");
    return j.get<std::string>();
}

std::uint64_t unsigned64(const Json& j, const std::string& where)
{
    require(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0),
            where + " must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

Vec3 vec3(const Json& j, const std::string& where)
{
    require(j.is_array() && j.size() == 3, where + " must be an array of 3 numbers");
    return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

Json vec3_json(const Vec3& v)
{
    return Json::array({v.x(), v.y(), v.z()});
}

UnitQuaternion quaternion(const Json& j, const std::string& where)
{
    require(j.is_array() && j.size() == 4, where + " must be [x, y, z, w]");
    return UnitQuaternion::from_components(number(j[0], where), number(j[1], where), number(j[2], where),
                                           number(j[3], where));
}

Json quaternion_json(const UnitQuaternion& q)
{
    return Json::array({q.x(), q.y(), q.z(), q.w()});
}

std::vector<double> numbers(const Json& j, const std::string& where)
{
    require(j.is_array(), where + " must be an array");
    std::vector<double> out;
    for (const Json& v : j) out.push_back(number(v, where));
    return out;
}

AntennaPair pair(const Json& j, const std::string& where)
{
    require(j.is_array() && j.size() == 2, where + " must be [from, to]");
    return {integer(j[0], where), integer(j[1], where)};
}

Json pair_json(const AntennaPair& p)
{
    return Json::array({p.from, p.to});
}

Json parse_document(std::string_view text)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Malformed(std::string("invalid JSON: ") + e.what());
    }
}

/// Config documents: shape problems are configuration errors.
template <typename F>
auto config_guard(F&& body) -> decltype(body())
{
    try {
        return body();
    } catch (const Malformed& e) {
        throw ConfigurationError(e.what());
    } catch (const Json::exception& e) {
        throw ConfigurationError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Scenario pieces
// ---------------------------------------------------------------------------

AntennaLayout layout_from(const Json& j)
{
    allow_keys(j, {"circumradius", "count", "positions"}, "layout");
    if (j.contains("positions")) {
        require(!j.contains("circumradius") && !j.contains("count"),
                "layout takes either positions or circumradius/count");
        const Json& ps = j.at("positions");
        require(ps.is_array(), "layout.positions must be an array");
        std::vector<Vec3> positions;
        for (const Json& p : ps) positions.push_back(vec3(p, "layout.positions"));
        return AntennaLayout(std::move(positions));
    }
    return AntennaLayout::hexagon(number_or(j, "circumradius", 0.9, "layout"), integer_or(j, "count", 6, "layout"));
}

PiecewiseLinear profile_from(const Json& j, const std::string& where)
{
    PiecewiseLinear f;
    if (j.is_number()) {
        f.knots.emplace_back(0.0, j.get<double>());
        return f;
    }
    require(j.is_array(), where + " must be a number or a list of [t, value] knots");
    for (const Json& k : j) {
        require(k.is_array() && k.size() == 2, where + " knots must be [t, value]");
        f.knots.emplace_back(number(k[0], where), number(k[1], where));
    }
    for (std::size_t i = 1; i < f.knots.size(); ++i)
        require(f.knots[i].first > f.knots[i - 1].first, where + " knot times must increase");
    return f;
}

Trajectory trajectory_from(const Json& j)
{
    allow_keys(j, {"kind", "position", "waypoints", "speed"}, "trajectory");
    Trajectory t;
    const std::string kind = j.contains("kind") ? string(j.at("kind"), "trajectory.kind") : "STATIC";
    if (kind == "STATIC") {
        t.kind = Trajectory::Kind::STATIC;
        if (j.contains("position")) t.static_position = vec3(j.at("position"), "trajectory.position");
    } else if (kind == "WAYPOINT") {
        t.kind = Trajectory::Kind::WAYPOINT;
        require(j.contains("waypoints") && j.at("waypoints").is_array(), "trajectory.waypoints must be an array");
        for (const Json& w : j.at("waypoints")) t.waypoints.push_back(vec3(w, "trajectory.waypoints"));
        t.speed = number_or(j, "speed", t.speed, "trajectory");
    } else {
        throw Malformed("trajectory.kind must be STATIC or WAYPOINT");
    }
    return t;
}

MountCalibration mount_from(const Json& j, const std::string& where)
{
    MountCalibration m;
    if (j.contains("lever_arm")) m.lever_arm = vec3(j.at("lever_arm"), where + ".lever_arm");
    if (j.contains("boresight")) m.boresight = quaternion(j.at("boresight"), where + ".boresight");
    return m;
}

ScannerModel scanner_from(const Json& j)
{
    allow_keys(j,
               {"beams", "beam_spread_deg", "sweep_half_fov_deg", "sweep_step_deg", "range_sigma", "max_range",
                "lever_arm", "boresight"},
               "scanner");
    ScannerModel s;
    s.beams = integer_or(j, "beams", s.beams, "scanner");
    s.beam_spread_deg = number_or(j, "beam_spread_deg", s.beam_spread_deg, "scanner");
    s.sweep_half_fov_deg = number_or(j, "sweep_half_fov_deg", s.sweep_half_fov_deg, "scanner");
    s.sweep_step_deg = number_or(j, "sweep_step_deg", s.sweep_step_deg, "scanner");
    s.range_sigma = number_or(j, "range_sigma", s.range_sigma, "scanner");
    s.max_range = number_or(j, "max_range", s.max_range, "scanner");
    s.mount = mount_from(j, "scanner");
    return s;
}

ScenarioConfig scenario_from(const Json& j)
{
    allow_keys(j,
               {"seed", "duration_s", "rate_hz", "layout", "trajectory", "attitude", "constellation", "sky_mask",
                "noise", "fix", "snr", "ground_height", "reflectors", "scanner"},
               "scenario");
    ScenarioConfig c;
    if (j.contains("seed")) c.seed = unsigned64(j.at("seed"), "seed");
    c.duration_s = number_or(j, "duration_s", c.duration_s, "scenario");
    c.rate_hz = number_or(j, "rate_hz", c.rate_hz, "scenario");
    if (j.contains("layout")) c.layout = layout_from(j.at("layout"));
    if (j.contains("trajectory")) c.trajectory = trajectory_from(j.at("trajectory"));

    if (j.contains("attitude")) {
        const Json& a = j.at("attitude");
        allow_keys(a, {"roll_deg", "pitch_deg", "yaw_deg"}, "attitude");
        if (a.contains("roll_deg")) c.attitude.roll_deg = profile_from(a.at("roll_deg"), "attitude.roll_deg");
        if (a.contains("pitch_deg")) c.attitude.pitch_deg = profile_from(a.at("pitch_deg"), "attitude.pitch_deg");
        if (a.contains("yaw_deg")) c.attitude.yaw_deg = profile_from(a.at("yaw_deg"), "attitude.yaw_deg");
    }

    if (j.contains("constellation")) {
        const Json& cs = j.at("constellation");
        require(cs.is_array(), "constellation must be an array");
        c.constellation.clear();
        for (const Json& s : cs) {
            allow_keys(s, {"sat_id", "azimuth_deg", "elevation_deg"}, "constellation entry");
            Satellite sat;
            require(s.contains("sat_id"), "constellation entry needs sat_id");
            sat.sat_id = string(s.at("sat_id"), "sat_id");
            sat.azimuth_deg = number_or(s, "azimuth_deg", sat.azimuth_deg, "constellation");
            sat.elevation_deg = number_or(s, "elevation_deg", sat.elevation_deg, "constellation");
            c.constellation.push_back(std::move(sat));
        }
    }

    if (j.contains("sky_mask")) {
        const Json& ms = j.at("sky_mask");
        require(ms.is_array(), "sky_mask must be an array");
        for (const Json& m : ms) {
            allow_keys(m, {"az_min_deg", "az_max_deg", "mask_elevation_deg"}, "sky_mask entry");
            SkyMaskSector s;
            s.az_min_deg = number_or(m, "az_min_deg", 0.0, "sky_mask");
            s.az_max_deg = number_or(m, "az_max_deg", 0.0, "sky_mask");
            s.mask_elevation_deg = number_or(m, "mask_elevation_deg", 0.0, "sky_mask");
            c.sky_mask.push_back(s);
        }
    }

    if (j.contains("noise")) {
        const Json& n = j.at("noise");
        allow_keys(n, {"position_fixed_sigma", "position_float_sigma", "baseline_fixed_sigma", "baseline_float_sigma"},
                   "noise");
        c.noise.position_fixed_sigma = number_or(n, "position_fixed_sigma", c.noise.position_fixed_sigma, "noise");
        c.noise.position_float_sigma = number_or(n, "position_float_sigma", c.noise.position_float_sigma, "noise");
        c.noise.baseline_fixed_sigma = number_or(n, "baseline_fixed_sigma", c.noise.baseline_fixed_sigma, "noise");
        c.noise.baseline_float_sigma = number_or(n, "baseline_float_sigma", c.noise.baseline_float_sigma, "noise");
    }

    if (j.contains("fix")) {
        const Json& f = j.at("fix");
        allow_keys(f,
                   {"target_rates", "base_logits", "baseline_target_rate", "baseline_base_logit", "clean_slope",
                    "multipath_penalty", "wrong_fix_prob", "wrong_fix_max_cycles", "min_sats"},
                   "fix");
        if (f.contains("target_rates")) c.fix.target_rates = numbers(f.at("target_rates"), "fix.target_rates");
        if (f.contains("base_logits")) c.fix.base_logits = numbers(f.at("base_logits"), "fix.base_logits");
        if (f.contains("baseline_target_rate") && !f.at("baseline_target_rate").is_null())
            c.fix.baseline_target_rate = number(f.at("baseline_target_rate"), "fix.baseline_target_rate");
        c.fix.baseline_base_logit = number_or(f, "baseline_base_logit", c.fix.baseline_base_logit, "fix");
        c.fix.clean_slope = number_or(f, "clean_slope", c.fix.clean_slope, "fix");
        c.fix.multipath_penalty = number_or(f, "multipath_penalty", c.fix.multipath_penalty, "fix");
        c.fix.wrong_fix_prob = number_or(f, "wrong_fix_prob", c.fix.wrong_fix_prob, "fix");
        c.fix.wrong_fix_max_cycles = integer_or(f, "wrong_fix_max_cycles", c.fix.wrong_fix_max_cycles, "fix");
        c.fix.min_sats = integer_or(f, "min_sats", c.fix.min_sats, "fix");
    }

    if (j.contains("snr")) {
        const Json& s = j.at("snr");
        allow_keys(s,
                   {"zenith_db", "horizon_db", "multipath_loss_db", "fading_amplitude_db", "fading_period_s",
                    "thermal_jitter_db", "antenna_phase_offsets_deg"},
                   "snr");
        c.snr.zenith_db = number_or(s, "zenith_db", c.snr.zenith_db, "snr");
        c.snr.horizon_db = number_or(s, "horizon_db", c.snr.horizon_db, "snr");
        c.snr.multipath_loss_db = number_or(s, "multipath_loss_db", c.snr.multipath_loss_db, "snr");
        c.snr.fading_amplitude_db = number_or(s, "fading_amplitude_db", c.snr.fading_amplitude_db, "snr");
        c.snr.fading_period_s = number_or(s, "fading_period_s", c.snr.fading_period_s, "snr");
        c.snr.thermal_jitter_db = number_or(s, "thermal_jitter_db", c.snr.thermal_jitter_db, "snr");
        if (s.contains("antenna_phase_offsets_deg"))
            c.snr.antenna_phase_offsets_deg = numbers(s.at("antenna_phase_offsets_deg"), "snr.antenna_phase_offsets_deg");
    }

    c.ground_height = number_or(j, "ground_height", c.ground_height, "scenario");
    if (j.contains("reflectors")) {
        const Json& rs = j.at("reflectors");
        require(rs.is_array(), "reflectors must be an array");
        for (const Json& r : rs) {
            allow_keys(r, {"center", "radius"}, "reflector");
            Reflector ref;
            require(r.contains("center"), "reflector needs a center");
            ref.center = vec3(r.at("center"), "reflector.center");
            ref.radius = number_or(r, "radius", ref.radius, "reflector");
            c.reflectors.push_back(ref);
        }
    }
    if (j.contains("scanner") && !j.at("scanner").is_null()) c.scanner = scanner_from(j.at("scanner"));
    return c;
}

// ---------------------------------------------------------------------------
// Epoch pieces
// ---------------------------------------------------------------------------

Json candidate_json(const FixCandidate& c)
{
    Json j;
    j["u_fix"] = c.u_fix;
    j["fixed"] = vec3_json(c.fixed);
    j["floating"] = vec3_json(c.floating);
    j["wrong"] = c.wrong;
    return j;
}

FixCandidate candidate_from(const Json& j)
{
    allow_keys(j, {"u_fix", "fixed", "floating", "wrong"}, "candidate");
    FixCandidate c;
    c.u_fix = number(j.at("u_fix"), "candidate.u_fix");
    c.fixed = vec3(j.at("fixed"), "candidate.fixed");
    c.floating = vec3(j.at("floating"), "candidate.floating");
    require(j.at("wrong").is_boolean(), "candidate.wrong must be a boolean");
    c.wrong = j.at("wrong").get<bool>();
    return c;
}

Json truth_json(const EpochTruth& t)
{
    Json j;
    j["position"] = vec3_json(t.position);
    j["attitude"] = quaternion_json(t.attitude);
    j["multipath_sats"] = Json::array();
    for (const std::string& s : t.multipath_sats) j["multipath_sats"].push_back(s);
    j["corrupted_baselines"] = Json::array();
    for (const AntennaPair& p : t.corrupted_baselines) j["corrupted_baselines"].push_back(pair_json(p));
    j["wrong_fix_antennas"] = t.wrong_fix_antennas;
    Json m;
    m["antenna_logits"] = t.fix_model.antenna_logits;
    m["baseline_logit"] = t.fix_model.baseline_logit;
    m["clean_slope"] = t.fix_model.clean_slope;
    m["multipath_penalty"] = t.fix_model.multipath_penalty;
    m["min_sats"] = t.fix_model.min_sats;
    j["fix_model"] = std::move(m);
    j["antenna_candidates"] = Json::array();
    for (const FixCandidate& c : t.antenna_candidates) j["antenna_candidates"].push_back(candidate_json(c));
    j["baseline_candidates"] = Json::array();
    for (const FixCandidate& c : t.baseline_candidates) j["baseline_candidates"].push_back(candidate_json(c));
    return j;
}

EpochTruth truth_from(const Json& j)
{
    allow_keys(j,
               {"position", "attitude", "multipath_sats", "corrupted_baselines", "wrong_fix_antennas", "fix_model",
                "antenna_candidates", "baseline_candidates"},
               "truth");
    EpochTruth t;
    t.position = vec3(j.at("position"), "truth.position");
    t.attitude = quaternion(j.at("attitude"), "truth.attitude");
    if (j.contains("multipath_sats"))
        for (const Json& s : j.at("multipath_sats")) t.multipath_sats.insert(string(s, "truth.multipath_sats"));
    if (j.contains("corrupted_baselines"))
        for (const Json& p : j.at("corrupted_baselines"))
            t.corrupted_baselines.push_back(pair(p, "truth.corrupted_baselines"));
    if (j.contains("wrong_fix_antennas"))
        for (const Json& a : j.at("wrong_fix_antennas"))
            t.wrong_fix_antennas.push_back(integer(a, "truth.wrong_fix_antennas"));
    if (j.contains("fix_model")) {
        const Json& m = j.at("fix_model");
        allow_keys(m, {"antenna_logits", "baseline_logit", "clean_slope", "multipath_penalty", "min_sats"},
                   "truth.fix_model");
        t.fix_model.antenna_logits = numbers(m.at("antenna_logits"), "fix_model.antenna_logits");
        t.fix_model.baseline_logit = number(m.at("baseline_logit"), "fix_model.baseline_logit");
        t.fix_model.clean_slope = number(m.at("clean_slope"), "fix_model.clean_slope");
        t.fix_model.multipath_penalty = number(m.at("multipath_penalty"), "fix_model.multipath_penalty");
        t.fix_model.min_sats = integer(m.at("min_sats"), "fix_model.min_sats");
    }
    if (j.contains("antenna_candidates"))
        for (const Json& c : j.at("antenna_candidates")) t.antenna_candidates.push_back(candidate_from(c));
    if (j.contains("baseline_candidates"))
        for (const Json& c : j.at("baseline_candidates")) t.baseline_candidates.push_back(candidate_from(c));
    return t;
}

Json optional_number(const std::optional<double>& v, double scale)
{
    if (!v) return nullptr;
    return std::round(*v * scale) / scale;
}

}  // namespace

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("error while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

ScenarioConfig parse_scenario(std::string_view json_text)
{
    ScenarioConfig c = config_guard([&] { return scenario_from(parse_document(json_text)); });
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path)
{
    return parse_scenario(read_text_file(path));
}

PipelineConfig parse_pipeline_config(std::string_view json_text)
{
    PipelineConfig c = config_guard([&] {
        const Json j = parse_document(json_text);
        allow_keys(j,
                   {"layout", "ransac", "multipath", "multipath_feedback", "attitude_min_baselines", "active_antennas",
                    "outputs"},
                   "pipeline config");
        PipelineConfig p;
        if (j.contains("layout")) p.layout = layout_from(j.at("layout"));
        if (j.contains("ransac")) {
            const Json& r = j.at("ransac");
            allow_keys(r, {"max_iterations", "inlier_threshold", "min_sample", "min_inliers", "seed"}, "ransac");
            p.ransac.max_iterations = integer_or(r, "max_iterations", p.ransac.max_iterations, "ransac");
            p.ransac.inlier_threshold = number_or(r, "inlier_threshold", p.ransac.inlier_threshold, "ransac");
            p.ransac.min_sample = integer_or(r, "min_sample", p.ransac.min_sample, "ransac");
            p.ransac.min_inliers = integer_or(r, "min_inliers", p.ransac.min_inliers, "ransac");
            if (r.contains("seed")) p.ransac.seed = unsigned64(r.at("seed"), "ransac.seed");
        }
        if (j.contains("multipath")) {
            const Json& m = j.at("multipath");
            allow_keys(m, {"threshold", "min_count"}, "multipath");
            p.multipath.threshold = number_or(m, "threshold", p.multipath.threshold, "multipath");
            p.multipath.min_count = integer_or(m, "min_count", p.multipath.min_count, "multipath");
        }
        p.multipath_feedback = boolean_or(j, "multipath_feedback", p.multipath_feedback, "pipeline config");
        p.attitude_min_baselines =
            integer_or(j, "attitude_min_baselines", p.attitude_min_baselines, "pipeline config");
        if (j.contains("active_antennas"))
            for (const Json& a : j.at("active_antennas"))
                p.active_antennas.push_back(integer(a, "active_antennas"));
        if (j.contains("outputs")) {
            const Json& o = j.at("outputs");
            allow_keys(o, {"poses", "metrics"}, "outputs");
            if (o.contains("poses")) p.poses_path = string(o.at("poses"), "outputs.poses");
            if (o.contains("metrics")) p.metrics_path = string(o.at("metrics"), "outputs.metrics");
        }
        return p;
    });
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const std::string& path)
{
    return parse_pipeline_config(read_text_file(path));
}

CalibrationFile parse_calibration(std::string_view json_text)
{
    return config_guard([&] {
        const Json j = parse_document(json_text);
        allow_keys(j, {"lever_arm", "boresight", "max_pose_gap"}, "calibration");
        CalibrationFile c;
        c.calib = mount_from(j, "calibration");
        c.max_pose_gap = number_or(j, "max_pose_gap", c.max_pose_gap, "calibration");
        require(c.max_pose_gap >= 0.0, "max_pose_gap must be >= 0");
        return c;
    });
}

CalibrationFile load_calibration(const std::string& path)
{
    return parse_calibration(read_text_file(path));
}

ReflectorFile parse_reflectors(std::string_view json_text)
{
    return config_guard([&] {
        const Json j = parse_document(json_text);
        allow_keys(j, {"reflectors", "cluster_radius", "min_hits"}, "reflector file");
        ReflectorFile r;
        require(j.contains("reflectors") && j.at("reflectors").is_array(), "reflectors must be an array");
        for (const Json& p : j.at("reflectors")) r.reflectors.push_back(vec3(p, "reflectors"));
        r.cluster_radius = number_or(j, "cluster_radius", r.cluster_radius, "reflector file");
        r.min_hits = integer_or(j, "min_hits", r.min_hits, "reflector file");
        return r;
    });
}

ReflectorFile load_reflectors(const std::string& path)
{
    return parse_reflectors(read_text_file(path));
}

std::vector<AntennaId> parse_antenna_list(std::string_view text)
{
    std::vector<AntennaId> ids;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        std::string item(text.substr(start, comma - start));
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        char* end = nullptr;
        const long v = std::strtol(item.c_str(), &end, 10);
        if (item.empty() || end != item.c_str() + item.size())
            throw ValidationError("invalid antenna list '" + std::string(text) + "'");
        ids.push_back(static_cast<AntennaId>(v));
        start = comma + 1;
    }
    return ids;
}

// ---------------------------------------------------------------------------
// Epoch stream
// ---------------------------------------------------------------------------

std::string epoch_to_json(const EpochRecord& epoch)
{
    Json j;
    j["t"] = epoch.t;
    j["fixes"] = Json::array();
    for (const FixSolution& f : epoch.fixes) {
        Json fj;
        fj["antenna_id"] = f.antenna_id;
        fj["status"] = std::string(to_string(f.status));
        fj["p"] = f.p ? vec3_json(*f.p) : Json(nullptr);
        fj["sats_used"] = f.sats_used;
        j["fixes"].push_back(std::move(fj));
    }
    j["baselines"] = Json::array();
    for (const VectorObservation& b : epoch.baselines) {
        Json bj;
        bj["pair"] = pair_json(b.pair);
        bj["v"] = vec3_json(b.v);
        bj["w"] = vec3_json(b.w);
        bj["fixed"] = b.fixed;
        j["baselines"].push_back(std::move(bj));
    }
    j["snr_rows"] = Json::array();
    for (const SnrRow& r : epoch.snr_rows) {
        Json rj;
        rj["sat_id"] = r.sat_id;
        rj["snr"] = Json::array();
        for (const auto& v : r.snr) rj["snr"].push_back(v ? Json(*v) : Json(nullptr));
        j["snr_rows"].push_back(std::move(rj));
    }
    if (epoch.truth) j["truth"] = truth_json(*epoch.truth);
    return j.dump();
}

EpochRecord epoch_from_json(std::string_view line)
{
    try {
        const Json j = parse_document(line);
        allow_keys(j, {"t", "fixes", "baselines", "snr_rows", "truth"}, "epoch");
        require(j.contains("t"), "epoch needs t");
        EpochRecord e;
        e.t = number(j.at("t"), "t");
        require(std::isfinite(e.t), "t must be finite");
        if (j.contains("fixes")) {
            require(j.at("fixes").is_array(), "fixes must be an array");
            for (const Json& fj : j.at("fixes")) {
                allow_keys(fj, {"antenna_id", "status", "p", "sats_used"}, "fix");
                FixSolution f;
                f.antenna_id = integer(fj.at("antenna_id"), "fix.antenna_id");
                f.status = fix_status_from_string(string(fj.at("status"), "fix.status"));
                if (fj.contains("p") && !fj.at("p").is_null()) f.p = vec3(fj.at("p"), "fix.p");
                f.sats_used = integer_or(fj, "sats_used", 0, "fix");
                e.fixes.push_back(std::move(f));
            }
        }
        if (j.contains("baselines")) {
            require(j.at("baselines").is_array(), "baselines must be an array");
            for (const Json& bj : j.at("baselines")) {
                allow_keys(bj, {"pair", "v", "w", "fixed"}, "baseline");
                VectorObservation b;
                b.pair = pair(bj.at("pair"), "baseline.pair");
                b.v = vec3(bj.at("v"), "baseline.v");
                b.w = vec3(bj.at("w"), "baseline.w");
                b.fixed = boolean_or(bj, "fixed", true, "baseline");
                e.baselines.push_back(b);
            }
        }
        if (j.contains("snr_rows")) {
            require(j.at("snr_rows").is_array(), "snr_rows must be an array");
            for (const Json& rj : j.at("snr_rows")) {
                allow_keys(rj, {"sat_id", "snr"}, "snr row");
                SnrRow r;
                r.sat_id = string(rj.at("sat_id"), "snr_rows.sat_id");
                require(rj.at("snr").is_array(), "snr_rows.snr must be an array");
                for (const Json& v : rj.at("snr"))
                    r.snr.push_back(v.is_null() ? std::nullopt : std::optional<double>(number(v, "snr value")));
                e.snr_rows.push_back(std::move(r));
            }
        }
        if (j.contains("truth") && !j.at("truth").is_null()) e.truth = truth_from(j.at("truth"));
        return e;
    } catch (const Malformed& ex) {
        throw ValidationError(ex.what());
    } catch (const Json::exception& ex) {
        throw ValidationError(ex.what());
    }
}

EpochWriter::EpochWriter(std::ostream& out) : out_(out)
{
    out_ << R"({"format":"mgp-epoch","version":1})" << '\n';
}

void EpochWriter::write(const EpochRecord& epoch)
{
    out_ << epoch_to_json(epoch) << '\n';
}

namespace {

void check_header(std::istream& in, std::string_view format)
{
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty stream, expected a '" + std::string(format) + "' header");
    try {
        const Json h = Json::parse(line);
        if (h.value("format", std::string()) != format || h.value("version", 0) != 1)
            throw IoError("stream header is not {\"format\":\"" + std::string(format) + "\",\"version\":1}");
    } catch (const Json::exception&) {
        throw IoError("unreadable stream header");
    }
}

}  // namespace

EpochReader::EpochReader(std::istream& in) : in_(in)
{
    check_header(in_, "mgp-epoch");
}

bool EpochReader::next(EpochRecord& epoch)
{
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            epoch = epoch_from_json(line);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_) + ": " + e.what());
        }
        return true;
    }
    if (in_.bad()) throw IoError("read error in epoch stream");
    return false;
}

// ---------------------------------------------------------------------------
// Scan stream
// ---------------------------------------------------------------------------

void write_scan_header(std::ostream& out)
{
    out << R"({"format":"mgp-scan","version":1})" << '\n';
}

void write_scan_line(std::ostream& out, const ScanLine& line)
{
    Json j;
    j["t"] = line.t;
    Json pts = Json::array();
    for (const ScanPoint& p : line.points)
        pts.push_back(Json::array({p.p.x(), p.p.y(), p.p.z(), p.reflector_flag ? 1 : 0}));
    j["points"] = std::move(pts);
    out << j.dump() << '\n';
}

std::vector<ScanLine> read_scan_stream(std::istream& in)
{
    check_header(in, "mgp-scan");
    std::vector<ScanLine> lines;
    std::string text;
    std::size_t n = 1;
    while (std::getline(in, text)) {
        ++n;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const Json j = parse_document(text);
            allow_keys(j, {"t", "points"}, "scan line");
            ScanLine line;
            line.t = number(j.at("t"), "t");
            require(j.at("points").is_array(), "points must be an array");
            for (const Json& p : j.at("points")) {
                require(p.is_array() && (p.size() == 3 || p.size() == 4), "scan points are [x, y, z, flag]");
                ScanPoint sp;
                sp.p = Vec3(number(p[0], "x"), number(p[1], "y"), number(p[2], "z"));
                sp.reflector_flag = p.size() == 4 && number(p[3], "flag") != 0.0;
                line.points.push_back(sp);
            }
            lines.push_back(std::move(line));
        } catch (const Malformed& e) {
            throw ValidationError("scan line " + std::to_string(n) + ": " + e.what());
        } catch (const Json::exception& e) {
            throw ValidationError("scan line " + std::to_string(n) + ": " + e.what());
        }
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Poses and clouds
// ---------------------------------------------------------------------------

std::vector<Pose> read_pose_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty pose file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,E,N,U,qx,qy,qz,qw,n_fix,att_available") throw IoError("unexpected pose CSV header");

    std::vector<Pose> poses;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 10) throw ValidationError("pose line " + std::to_string(n) + ": expected 10 fields");
        const bool complete = std::all_of(fields.begin(), fields.begin() + 8, [](const std::string& s) { return !s.empty(); });
        if (!complete) continue;
        double v[8];
        for (std::size_t i = 0; i < 8; ++i) {
            char* end = nullptr;
            v[i] = std::strtod(fields[i].c_str(), &end);
            if (end != fields[i].c_str() + fields[i].size())
                throw ValidationError("pose line " + std::to_string(n) + ": bad number '" + fields[i] + "'");
        }
        Pose p;
        p.t = v[0];
        p.p = Vec3(v[1], v[2], v[3]);
        // Printed components are rounded, so renormalize.
        p.q = UnitQuaternion::normalized(v[4], v[5], v[6], v[7]);
        poses.push_back(p);
    }
    return poses;
}

namespace {

bool is_binary_cloud(const std::string& path)
{
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}

void put_le(std::string& out, double v)
{
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_le(const unsigned char* p)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

constexpr std::size_t kCloudRecordSize = 3 * 8 + 1;

}  // namespace

void write_cloud(const std::string& path, std::span<const GeoPoint> cloud)
{
    std::string out;
    if (is_binary_cloud(path)) {
        out.reserve(cloud.size() * kCloudRecordSize);
        for (const GeoPoint& g : cloud) {
            put_le(out, g.p.x());
            put_le(out, g.p.y());
            put_le(out, g.p.z());
            out.push_back(static_cast<char>(g.reflector_flag ? 1 : 0));
        }
    } else {
        char buf[128];
        for (const GeoPoint& g : cloud) {
            std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %d\n", g.p.x(), g.p.y(), g.p.z(), g.reflector_flag ? 1 : 0);
            out += buf;
        }
    }
    write_text_file(path, out);
}

std::vector<GeoPoint> read_cloud(const std::string& path)
{
    const std::string data = read_text_file(path);
    std::vector<GeoPoint> cloud;
    if (is_binary_cloud(path)) {
        if (data.size() % kCloudRecordSize != 0) throw ValidationError("binary cloud size is not a whole number of records");
        const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
        for (std::size_t off = 0; off < data.size(); off += kCloudRecordSize) {
            GeoPoint g;
            g.p = Vec3(get_le(bytes + off), get_le(bytes + off + 8), get_le(bytes + off + 16));
            g.reflector_flag = bytes[off + 24] != 0;
            cloud.push_back(g);
        }
        return cloud;
    }
    std::istringstream in(data);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        GeoPoint g;
        double e = 0, nn = 0, u = 0;
        if (!(ls >> e >> nn >> u)) throw ValidationError("cloud line " + std::to_string(n) + ": expected E N U [flag]");
        int flag = 0;
        if (ls >> flag) g.reflector_flag = flag != 0;
        g.p = Vec3(e, nn, u);
        cloud.push_back(g);
    }
    return cloud;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string metrics_to_json(const MetricsReport& r)
{
    Json j;
    j["epochs_processed"] = r.epochs_processed;
    j["epochs_skipped"] = r.epochs_skipped;
    Json per = Json::object();
    for (const auto& [id, rate] : r.per_antenna_fix_rate) per[std::to_string(id)] = optional_number(rate, 10.0);
    j["per_antenna_fix_rate"] = std::move(per);
    j["hybrid_fix_rate"] = optional_number(r.hybrid_fix_rate, 10.0);
    j["hybrid_fix_rate_multipath"] = optional_number(r.hybrid_fix_rate_multipath, 10.0);
    j["attitude_availability"] = optional_number(r.attitude_availability, 10.0);
    if (r.attitude_sd_deg) {
        j["attitude_sd_deg"] = {{"roll", optional_number(r.attitude_sd_deg->roll_deg, 1e4)},
                                {"pitch", optional_number(r.attitude_sd_deg->pitch_deg, 1e4)},
                                {"yaw", optional_number(r.attitude_sd_deg->yaw_deg, 1e4)}};
    } else {
        j["attitude_sd_deg"] = nullptr;
    }
    if (r.position_sd_mm) {
        j["position_sd_mm"] = {{"E", optional_number(r.position_sd_mm->x(), 100.0)},
                               {"N", optional_number(r.position_sd_mm->y(), 100.0)},
                               {"U", optional_number(r.position_sd_mm->z(), 100.0)}};
    } else {
        j["position_sd_mm"] = nullptr;
    }
    j["sd_reference"] = r.sd_against_truth ? "truth" : "mean";
    j["multipath_precision"] = optional_number(r.multipath_precision, 1e4);
    j["multipath_recall"] = optional_number(r.multipath_recall, 1e4);
    return j.dump(2) + "\n";
}

std::string evaluation_to_json(const ReflectorEvaluation& ev, const ReflectorFile& setup)
{
    Json j;
    j["cluster_radius"] = setup.cluster_radius;
    j["min_hits"] = setup.min_hits;
    j["reflectors"] = Json::array();
    for (const ReflectorResult& r : ev.reflectors) {
        Json rj;
        rj["truth"] = vec3_json(r.truth);
        rj["hits"] = r.hits;
        rj["resolved"] = r.resolved;
        rj["estimate"] = r.estimate ? vec3_json(*r.estimate) : Json(nullptr);
        rj["error"] = r.error ? vec3_json(*r.error) : Json(nullptr);
        j["reflectors"].push_back(std::move(rj));
    }
    j["rms_horizontal_m"] = ev.rms_horizontal ? Json(*ev.rms_horizontal) : Json(nullptr);
    j["rms_vertical_m"] = ev.rms_vertical ? Json(*ev.rms_vertical) : Json(nullptr);
    j["unresolved"] = ev.unresolved;
    return j.dump(2) + "\n";
}

}  // namespace mgp::io
