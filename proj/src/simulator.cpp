#include "mgp/simulator.hpp"

#include "mgp/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace mgp {

namespace {

// Sub-stream tags for mix_seed().
constexpr std::uint64_t kStreamSnr = 1;
constexpr std::uint64_t kStreamAntennas = 2;
constexpr std::uint64_t kStreamBaselines = 3;
constexpr std::uint64_t kStreamSatPhase = 0x5A7;
constexpr std::uint64_t kStreamScan = 0x5CA9;

constexpr double kMaxLogit = 40.0;

Vec3 gaussian3(Rng& rng, double sigma)
{
    const double x = gaussian(rng, sigma);
    const double y = gaussian(rng, sigma);
    const double z = gaussian(rng, sigma);
    return {x, y, z};
}

/// The 26 nonzero vectors of {-1, 0, 1}^3, fixed order.
const std::array<Vec3, 26>& lattice_directions()
{
    static const std::array<Vec3, 26> dirs = [] {
        std::array<Vec3, 26> d;
        int n = 0;
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                for (int k = -1; k <= 1; ++k)
                    if (i != 0 || j != 0 || k != 0) d[static_cast<std::size_t>(n++)] = Vec3(i, j, k);
        return d;
    }();
    return dirs;
}

/// Draws every random number a solution may need, in a fixed order, whether
/// or not the outcome ends up using it.
FixCandidate draw_candidate(Rng& rng, const Vec3& truth, double sigma_fixed, double sigma_float,
                            double wrong_prob, int max_cycles)
{
    FixCandidate c;
    c.u_fix = uniform01(rng);
    const double u_wrong = uniform01(rng);
    const Vec3 noise_fixed = gaussian3(rng, sigma_fixed);
    const Vec3 noise_float = gaussian3(rng, sigma_float);
    const auto dir = std::uniform_int_distribution<int>(0, 25)(rng);
    const auto cycles = std::uniform_int_distribution<int>(1, std::max(1, max_cycles))(rng);

    c.wrong = u_wrong < wrong_prob;
    c.fixed = truth + noise_fixed;
    if (c.wrong) c.fixed += kL1Wavelength * cycles * lattice_directions()[static_cast<std::size_t>(dir)];
    c.floating = truth + noise_float;
    return c;
}

struct SatCounts {
    int clean = 0;
    int multipath = 0;

    int total() const { return clean + multipath; }
};

double fix_probability(double base, const FixModelState& m, const SatCounts& n)
{
    return logistic(base + m.clean_slope * (n.clean - 6) - m.multipath_penalty * n.multipath);
}

SatCounts count_sats(const std::vector<SnrRow>& rows, const std::set<std::string>& multipath,
                     const std::set<std::string>& excluded)
{
    SatCounts n;
    for (const SnrRow& row : rows) {
        if (excluded.count(row.sat_id)) continue;
        if (multipath.count(row.sat_id))
            ++n.multipath;
        else
            ++n.clean;
    }
    return n;
}

FixSolution antenna_outcome(AntennaId id, const FixCandidate& c, double p_fix, const SatCounts& n, int min_sats)
{
    FixSolution fix;
    fix.antenna_id = id;
    fix.sats_used = n.total();
    if (n.total() < min_sats) {
        fix.status = FixStatus::NONE;
        return fix;
    }
    if (c.u_fix < p_fix) {
        fix.status = FixStatus::FIXED;
        fix.p = c.fixed;
    } else {
        fix.status = FixStatus::FLOAT;
        fix.p = c.floating;
    }
    return fix;
}

bool baseline_fixed(const FixCandidate& c, double p_fix, const SatCounts& n, int min_sats)
{
    return n.total() >= min_sats && c.u_fix < p_fix;
}

void check(bool ok, const std::string& message)
{
    if (!ok) throw ValidationError(message);
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Scenario pieces
// ---------------------------------------------------------------------------

double logistic(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

double logit(double p)
{
    if (p <= 0.0) return -kMaxLogit;
    if (p >= 1.0) return kMaxLogit;
    return std::clamp(std::log(p / (1.0 - p)), -kMaxLogit, kMaxLogit);
}

bool is_masked(const std::vector<SkyMaskSector>& mask, const Satellite& sat)
{
    const double az = std::fmod(std::fmod(sat.azimuth_deg, 360.0) + 360.0, 360.0);
    for (const SkyMaskSector& s : mask) {
        const bool in_sector = s.az_min_deg <= s.az_max_deg ? (az >= s.az_min_deg && az < s.az_max_deg)
                                                            : (az >= s.az_min_deg || az < s.az_max_deg);
        if (in_sector && sat.elevation_deg < s.mask_elevation_deg) return true;
    }
    return false;
}

double PiecewiseLinear::at(double t) const
{
    if (knots.empty()) return 0.0;
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    const auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                     [](double value, const auto& k) { return value < k.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *std::prev(it);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

UnitQuaternion AttitudeProfile::at(double t) const
{
    return quat_from_euler({roll_deg.at(t), pitch_deg.at(t), yaw_deg.at(t)});
}

double Trajectory::path_length() const
{
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) len += (waypoints[i] - waypoints[i - 1]).norm();
    return len;
}

Vec3 Trajectory::position_at(double t) const
{
    if (kind == Kind::STATIC) return static_position;
    double remaining = std::max(0.0, t) * speed;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const Vec3 seg = waypoints[i] - waypoints[i - 1];
        const double len = seg.norm();
        if (remaining <= len && len > 0.0) return waypoints[i - 1] + seg * (remaining / len);
        remaining -= len;
    }
    return waypoints.back();
}

std::vector<Satellite> ScenarioConfig::default_constellation()
{
    return {
        {"G02", 30.0, 25.0},  {"G05", 75.0, 35.0},  {"G13", 110.0, 18.0}, {"G15", 160.0, 55.0},
        {"G20", 210.0, 40.0}, {"G24", 260.0, 25.0}, {"G29", 310.0, 65.0}, {"G30", 350.0, 30.0},
        {"C06", 20.0, 70.0},  {"C11", 140.0, 30.0}, {"C12", 190.0, 80.0}, {"C14", 280.0, 50.0},
        {"J01", 170.0, 75.0}, {"J02", 95.0, 60.0},
    };
}

void ScenarioConfig::validate() const
{
    const int n = layout.antenna_count();
    check(rate_hz > 0.0 && std::isfinite(rate_hz), "rate_hz must be > 0");
    check(duration_s >= 0.0 && std::isfinite(duration_s), "duration_s must be >= 0");
    if (trajectory.kind == Trajectory::Kind::WAYPOINT) {
        check(!trajectory.waypoints.empty(), "waypoint trajectory needs at least one waypoint");
        check(trajectory.speed > 0.0, "waypoint speed must be > 0");
    }
    std::set<std::string> ids;
    for (const Satellite& s : constellation) {
        check(!s.sat_id.empty(), "satellite without id");
        check(ids.insert(s.sat_id).second, "duplicate satellite " + s.sat_id);
        check(s.elevation_deg > 0.0 && s.elevation_deg <= 90.0, "elevation of " + s.sat_id + " must be in (0, 90]");
    }
    for (const SkyMaskSector& m : sky_mask)
        check(m.mask_elevation_deg >= 0.0 && m.mask_elevation_deg <= 90.0, "mask elevation must be in [0, 90]");

    check(noise.position_fixed_sigma >= 0.0 && noise.position_float_sigma >= 0.0 &&
              noise.baseline_fixed_sigma >= 0.0 && noise.baseline_float_sigma >= 0.0,
          "noise sigmas must be >= 0");

    check(fix.target_rates.empty() || static_cast<int>(fix.target_rates.size()) == n,
          "fix target_rates must list one rate per antenna");
    for (double p : fix.target_rates) check(probability(p), "fix target rates must be in [0, 1]");
    check(fix.base_logits.size() == 1 || static_cast<int>(fix.base_logits.size()) == n,
          "fix base_logits must hold one value or one per antenna");
    check(!fix.baseline_target_rate || probability(*fix.baseline_target_rate),
          "baseline target rate must be in [0, 1]");
    check(probability(fix.wrong_fix_prob), "wrong_fix_prob must be in [0, 1]");
    check(fix.wrong_fix_max_cycles >= 1, "wrong_fix_max_cycles must be >= 1");
    check(fix.multipath_penalty >= 0.0, "multipath_penalty must be >= 0");
    check(fix.min_sats >= 0, "min_sats must be >= 0");

    check(snr.fading_period_s > 0.0, "fading period must be > 0");
    check(snr.fading_amplitude_db >= 0.0 && snr.thermal_jitter_db >= 0.0, "SNR amplitudes must be >= 0");
    check(snr.antenna_phase_offsets_deg.empty() || static_cast<int>(snr.antenna_phase_offsets_deg.size()) == n,
          "antenna_phase_offsets_deg must list one offset per antenna");

    for (const Reflector& r : reflectors) check(r.radius > 0.0, "reflector radius must be > 0");
    if (scanner) {
        check(scanner->beams >= 1, "scanner needs at least one beam");
        check(scanner->sweep_step_deg > 0.0 && scanner->sweep_half_fov_deg >= 0.0, "invalid scanner sweep");
        check(scanner->range_sigma >= 0.0 && scanner->max_range > 0.0, "invalid scanner range model");
    }
}

std::size_t ScenarioConfig::epoch_count() const
{
    return static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9));
}

// ---------------------------------------------------------------------------
// Epoch validation and re-query
// ---------------------------------------------------------------------------

void validate(const EpochRecord& epoch)
{
    if (!std::isfinite(epoch.t)) throw ValidationError("epoch time is not finite");
    std::set<AntennaId> antennas;
    for (const FixSolution& f : epoch.fixes) {
        validate(f);
        if (!antennas.insert(f.antenna_id).second)
            throw ValidationError("duplicate fix for antenna " + std::to_string(f.antenna_id));
    }
    std::set<AntennaPair> pairs;
    for (const VectorObservation& b : epoch.baselines) {
        validate(b);
        const AntennaPair key{std::min(b.pair.from, b.pair.to), std::max(b.pair.from, b.pair.to)};
        if (!pairs.insert(key).second) throw ValidationError("duplicate baseline " + to_string(b.pair));
    }
    std::set<std::string> sats;
    for (const SnrRow& row : epoch.snr_rows) {
        validate(row);
        if (!sats.insert(row.sat_id).second) throw ValidationError("duplicate SNR row " + row.sat_id);
    }
    if (epoch.truth) {
        if (epoch.truth->baseline_candidates.size() != epoch.baselines.size())
            throw ValidationError("truth baseline candidates do not match the baselines");
    }
}

RequeryOutcome requery_outcomes(const EpochRecord& epoch, const std::set<std::string>& excluded)
{
    if (!epoch.truth) throw ValidationError("re-query needs the simulator truth channel");
    const EpochTruth& truth = *epoch.truth;
    const FixModelState& m = truth.fix_model;
    const SatCounts n = count_sats(epoch.snr_rows, truth.multipath_sats, excluded);

    RequeryOutcome out;
    out.fixes.reserve(epoch.fixes.size());
    for (const FixSolution& f : epoch.fixes) {
        const auto idx = static_cast<std::size_t>(f.antenna_id - 1);
        if (f.antenna_id < 1 || idx >= truth.antenna_candidates.size() || idx >= m.antenna_logits.size())
            throw ValidationError("no truth candidate for antenna " + std::to_string(f.antenna_id));
        out.fixes.push_back(antenna_outcome(f.antenna_id, truth.antenna_candidates[idx],
                                            fix_probability(m.antenna_logits[idx], m, n), n, m.min_sats));
    }

    const double p_baseline = fix_probability(m.baseline_logit, m, n);
    out.baselines = epoch.baselines;
    for (std::size_t i = 0; i < out.baselines.size(); ++i) {
        const FixCandidate& c = truth.baseline_candidates.at(i);
        const bool fixed = baseline_fixed(c, p_baseline, n, m.min_sats);
        out.baselines[i].fixed = fixed;
        out.baselines[i].v = fixed ? c.fixed : c.floating;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

Simulator::Simulator(ScenarioConfig config) : config_(std::move(config))
{
    config_.validate();
    const int n = config_.layout.antenna_count();

    for (const Satellite& s : config_.constellation) {
        const bool mp = is_masked(config_.sky_mask, s);
        sat_multipath_.push_back(mp);
        (mp ? nominal_multipath_ : nominal_clean_)++;
    }

    Rng phase_rng(mix_seed(config_.seed, kStreamSatPhase));
    for (std::size_t i = 0; i < config_.constellation.size(); ++i)
        sat_phase_rad_.push_back(2.0 * kPi * uniform01(phase_rng));

    const FixModel& fm = config_.fix;
    model_.clean_slope = fm.clean_slope;
    model_.multipath_penalty = fm.multipath_penalty;
    model_.min_sats = fm.min_sats;

    // Calibrate the logit offsets so the nominal sky reproduces the targets.
    const double nominal_shift = fm.clean_slope * (nominal_clean_ - 6) - fm.multipath_penalty * nominal_multipath_;
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!fm.target_rates.empty())
            model_.antenna_logits.push_back(logit(fm.target_rates[idx]) - nominal_shift);
        else
            model_.antenna_logits.push_back(fm.base_logits.size() == 1 ? fm.base_logits[0] : fm.base_logits[idx]);
    }
    model_.baseline_logit =
        fm.baseline_target_rate ? logit(*fm.baseline_target_rate) - nominal_shift : fm.baseline_base_logit;
}

Pose Simulator::truth_pose(std::size_t k) const
{
    const double t = config_.epoch_time(k);
    return {t, config_.trajectory.position_at(t), config_.attitude.at(t)};
}

EpochRecord Simulator::epoch(std::size_t k) const
{
    const ScenarioConfig& cfg = config_;
    const AntennaLayout& layout = cfg.layout;
    const int n_ant = layout.antenna_count();
    const std::uint64_t epoch_seed = mix_seed(cfg.seed, k);
    const Pose pose = truth_pose(k);

    EpochRecord rec;
    rec.t = pose.t;
    EpochTruth truth;
    truth.position = pose.p;
    truth.attitude = pose.q;
    truth.fix_model = model_;

    // SNR rows; blocked satellites arrive only as fading reflections.
    Rng snr_rng(mix_seed(epoch_seed, kStreamSnr));
    const SnrModel& sm = cfg.snr;
    for (std::size_t s = 0; s < cfg.constellation.size(); ++s) {
        const Satellite& sat = cfg.constellation[s];
        const double nominal =
            sm.horizon_db + (sm.zenith_db - sm.horizon_db) * std::sin(sat.elevation_deg * kDegToRad);
        SnrRow row;
        row.sat_id = sat.sat_id;
        for (int a = 0; a < n_ant; ++a) {
            double value;
            if (sat_multipath_[s]) {
                const double offset = sm.antenna_phase_offsets_deg.empty()
                                          ? 2.0 * kPi * a / n_ant
                                          : sm.antenna_phase_offsets_deg[static_cast<std::size_t>(a)] * kDegToRad;
                const double phase = 2.0 * kPi * pose.t / sm.fading_period_s + sat_phase_rad_[s] + offset;
                value = nominal - sm.multipath_loss_db + sm.fading_amplitude_db * std::sin(phase);
            } else {
                value = nominal + gaussian(snr_rng, sm.thermal_jitter_db);
            }
            row.snr.push_back(std::clamp(value, kMinSnr, kMaxSnr));
        }
        if (sat_multipath_[s]) truth.multipath_sats.insert(sat.sat_id);
        rec.snr_rows.push_back(std::move(row));
    }
    const SatCounts counts = count_sats(rec.snr_rows, truth.multipath_sats, {});

    // Per-antenna RTK solutions.
    Rng ant_rng(mix_seed(epoch_seed, kStreamAntennas));
    for (AntennaId id = 1; id <= n_ant; ++id) {
        const Vec3 antenna_truth = pose.p + pose.q.rotate(layout.position(id));
        FixCandidate c = draw_candidate(ant_rng, antenna_truth, cfg.noise.position_fixed_sigma,
                                        cfg.noise.position_float_sigma, cfg.fix.wrong_fix_prob,
                                        cfg.fix.wrong_fix_max_cycles);
        const double p_fix = fix_probability(model_.antenna_logits[static_cast<std::size_t>(id - 1)], model_, counts);
        FixSolution fix = antenna_outcome(id, c, p_fix, counts, model_.min_sats);
        if (fix.status == FixStatus::FIXED && c.wrong) truth.wrong_fix_antennas.push_back(id);
        rec.fixes.push_back(std::move(fix));
        truth.antenna_candidates.push_back(c);
    }

    // Moving-base baselines for every antenna pair.
    Rng base_rng(mix_seed(epoch_seed, kStreamBaselines));
    const double p_baseline = fix_probability(model_.baseline_logit, model_, counts);
    for (const AntennaPair& pair : layout.all_pairs()) {
        const Vec3 w = layout.baseline(pair);
        FixCandidate c = draw_candidate(base_rng, pose.q.rotate(w), cfg.noise.baseline_fixed_sigma,
                                        cfg.noise.baseline_float_sigma, cfg.fix.wrong_fix_prob,
                                        cfg.fix.wrong_fix_max_cycles);
        VectorObservation obs;
        obs.pair = pair;
        obs.w = w;
        obs.fixed = baseline_fixed(c, p_baseline, counts, model_.min_sats);
        obs.v = obs.fixed ? c.fixed : c.floating;
        if (obs.fixed && c.wrong) truth.corrupted_baselines.push_back(pair);
        rec.baselines.push_back(obs);
        truth.baseline_candidates.push_back(c);
    }

    rec.truth = std::move(truth);
    return rec;
}

std::vector<EpochRecord> simulate(const ScenarioConfig& config)
{
    const Simulator sim(config);
    std::vector<EpochRecord> out;
    out.reserve(sim.epoch_count());
    for (std::size_t k = 0; k < sim.epoch_count(); ++k) out.push_back(sim.epoch(k));
    return out;
}

// ---------------------------------------------------------------------------
// Scanner
// ---------------------------------------------------------------------------

std::vector<ScanLine> scan_stream(const ScenarioConfig& config, const ScannerModel& scanner)
{
    if (config.trajectory.kind != Trajectory::Kind::WAYPOINT)
        throw ConfigurationError("scan simulation needs a WAYPOINT trajectory");
    ScenarioConfig checked = config;
    checked.scanner = scanner;
    const Simulator sim(checked);

    const double step = scanner.sweep_step_deg * kDegToRad;
    const double half_fov = scanner.sweep_half_fov_deg * kDegToRad;
    const double spread = scanner.beam_spread_deg * kDegToRad;

    std::vector<ScanLine> lines;
    lines.reserve(sim.epoch_count());
    for (std::size_t k = 0; k < sim.epoch_count(); ++k) {
        const Pose pose = sim.truth_pose(k);
        Rng rng(mix_seed(mix_seed(config.seed, kStreamScan), k));
        // The spin is not phase-locked to the pose clock.
        const double phase = step * uniform01(rng);

        const Vec3 origin = pose.p + pose.q.rotate(scanner.mount.lever_arm);
        ScanLine line;
        line.t = pose.t;
        for (int b = 0; b < scanner.beams; ++b) {
            const double tilt = scanner.beams == 1 ? 0.0 : -0.5 * spread + spread * b / (scanner.beams - 1);
            for (double sweep = -half_fov + phase; sweep <= half_fov; sweep += step) {
                const Vec3 dir_s(-std::sin(tilt), std::cos(tilt) * std::sin(sweep), -std::cos(tilt) * std::cos(sweep));
                const Vec3 dir = pose.q.rotate(scanner.mount.boresight.rotate(dir_s));
                if (!(dir.z() < 0.0)) continue;

                double best = std::numeric_limits<double>::infinity();
                int hit_reflector = -1;
                const double t_ground = (config.ground_height - origin.z()) / dir.z();
                if (t_ground > 0.0) best = t_ground;
                for (std::size_t r = 0; r < config.reflectors.size(); ++r) {
                    const Reflector& refl = config.reflectors[r];
                    const double t_disc = (refl.center.z() - origin.z()) / dir.z();
                    if (!(t_disc > 0.0) || t_disc > best + 1e-12) continue;
                    const Vec3 h = origin + t_disc * dir;
                    if ((h - refl.center).head<2>().norm() <= refl.radius) {
                        best = t_disc;
                        hit_reflector = static_cast<int>(r);
                    }
                }
                const double noise = gaussian(rng, scanner.range_sigma);
                if (!std::isfinite(best) || best > scanner.max_range) continue;

                line.points.push_back({(best + noise) * dir_s, hit_reflector >= 0});
                line.truth_world.push_back(origin + best * dir);
                line.truth_reflector.push_back(hit_reflector);
            }
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<Pose> perturb_poses(std::span<const Pose> truth, const PoseErrorModel& model, std::uint64_t seed)
{
    if (model.sigma_position < 0.0 || model.sigma_attitude < 0.0 || model.correlation_time_s < 0.0)
        throw ValidationError("pose error model parameters must be >= 0");
    Rng rng(seed);
    std::vector<Pose> out;
    out.reserve(truth.size());
    Vec3 dp = gaussian3(rng, model.sigma_position);
    Vec3 da = gaussian3(rng, model.sigma_attitude);
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (k > 0) {
            const double dt = truth[k].t - truth[k - 1].t;
            const double phi = model.correlation_time_s > 0.0 ? std::exp(-dt / model.correlation_time_s) : 0.0;
            const double drive = std::sqrt(1.0 - phi * phi);
            dp = phi * dp + drive * gaussian3(rng, model.sigma_position);
            da = phi * da + drive * gaussian3(rng, model.sigma_attitude);
        }
        out.push_back({truth[k].t, truth[k].p + dp, UnitQuaternion::from_rotation_vector(da) * truth[k].q});
    }
    return out;
}

}  // namespace mgp
