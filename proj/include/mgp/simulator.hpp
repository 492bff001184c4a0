/**
 * @file simulator.hpp
 * @brief Deterministic multi-antenna RTK epoch generator with ground truth.
 *
 * The simulator does not model carrier phase. It produces what an RTK engine
 * would hand over per epoch (fix/float positions, moving-base baselines and
 * per-satellite SNR) and records in a truth channel everything it injected.
 *
 * Fix success is a logistic model
 *
 *     logit p = base + clean_slope * (n_clean - 6) - multipath_penalty * n_multipath
 *
 * evaluated against a uniform draw kept in the truth channel, so the outcome
 * can be re-evaluated with a different satellite set (common random numbers).
 * This is what lets the pipeline replay an epoch after multipath exclusion.
 */

#ifndef MGP_SIMULATOR_HPP
#define MGP_SIMULATOR_HPP

#include "mgp/attitude.hpp"
#include "mgp/mapping.hpp"
#include "mgp/multipath.hpp"
#include "mgp/positioning.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mgp {

// ---------------------------------------------------------------------------
// Scenario description
// ---------------------------------------------------------------------------

struct Satellite {
    std::string sat_id;
    double azimuth_deg = 0.0;
    double elevation_deg = 45.0;
};

/// Satellites with azimuth in [az_min, az_max) (wrapping through north when
/// az_min > az_max) and elevation below mask_elevation are blocked; they
/// arrive only as reflections and are therefore multipath.
struct SkyMaskSector {
    double az_min_deg = 0.0;
    double az_max_deg = 0.0;
    double mask_elevation_deg = 0.0;
};

bool is_masked(const std::vector<SkyMaskSector>& mask, const Satellite& sat);

/// Piecewise-linear function of time, held constant outside its knots.
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> knots;  ///< (t, value), t increasing

    double at(double t) const;
};

struct AttitudeProfile {
    PiecewiseLinear roll_deg;
    PiecewiseLinear pitch_deg;
    PiecewiseLinear yaw_deg;

    UnitQuaternion at(double t) const;
};

struct Trajectory {
    enum class Kind { STATIC, WAYPOINT };

    Kind kind = Kind::STATIC;
    Vec3 static_position = Vec3::Zero();
    std::vector<Vec3> waypoints;
    double speed = 3.0;  ///< [m/s]

    /// Waypoint paths are flown at constant speed and hold at the last point.
    Vec3 position_at(double t) const;
    double path_length() const;
};

struct NoiseModel {
    double position_fixed_sigma = 0.005;  ///< per axis [m]
    double position_float_sigma = 0.3;
    double baseline_fixed_sigma = 0.005;
    double baseline_float_sigma = 0.3;
};

struct FixModel {
    /// Per-antenna fix rates to hit under the scenario's nominal sky.
    /// When set, they override base_logits.
    std::vector<double> target_rates;
    /// Per-antenna logit offsets (one value is broadcast to all antennas).
    std::vector<double> base_logits{10.0};
    std::optional<double> baseline_target_rate;
    double baseline_base_logit = 10.0;
    double clean_slope = 1.0;
    double multipath_penalty = 0.5;
    double wrong_fix_prob = 0.02;
    int wrong_fix_max_cycles = 3;
    int min_sats = 5;  ///< below this the antenna reports NONE
};

struct SnrModel {
    double zenith_db = 50.0;
    double horizon_db = 38.0;
    double multipath_loss_db = 4.0;  ///< mean loss of a reflected-only signal
    double fading_amplitude_db = 6.0;
    double fading_period_s = 4.0;
    double thermal_jitter_db = 0.5;  ///< line-of-sight satellites
    /// Fading phase of each antenna relative to the satellite's own phase.
    /// Empty means evenly spread over the cycle.
    std::vector<double> antenna_phase_offsets_deg;
};

struct Reflector {
    Vec3 center = Vec3::Zero();  ///< ENU [m]
    double radius = 0.25;        ///< horizontal disc [m]
};

/// Spinning multi-beam scanner. One revolution per pose epoch, all returns
/// of a revolution stamped with the epoch time. Beam b is tilted about the
/// scanner y axis; the revolution sweeps about the scanner x axis.
struct ScannerModel {
    int beams = 16;
    double beam_spread_deg = 30.0;     ///< total fore-aft spread
    double sweep_half_fov_deg = 30.0;  ///< returns kept within +/- this of nadir
    double sweep_step_deg = 0.5;
    double range_sigma = 0.02;  ///< [m]
    double max_range = 120.0;
    MountCalibration mount;  ///< truth mount used to simulate
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double duration_s = 60.0;
    double rate_hz = 10.0;
    AntennaLayout layout = AntennaLayout::hexagon();
    Trajectory trajectory;
    AttitudeProfile attitude;
    std::vector<Satellite> constellation = default_constellation();
    std::vector<SkyMaskSector> sky_mask;
    NoiseModel noise;
    FixModel fix;
    SnrModel snr;
    double ground_height = 0.0;
    std::vector<Reflector> reflectors;
    std::optional<ScannerModel> scanner;

    void validate() const;
    std::size_t epoch_count() const;
    double epoch_time(std::size_t k) const { return static_cast<double>(k) / rate_hz; }

    /// GPS + BeiDou + QZSS sky, 14 satellites.
    static std::vector<Satellite> default_constellation();
};

// ---------------------------------------------------------------------------
// Epoch records
// ---------------------------------------------------------------------------

/// Pre-drawn outcome of one RTK solution (antenna or baseline).
struct FixCandidate {
    double u_fix = 1.0;  ///< fixed iff u_fix < p_fix
    Vec3 fixed = Vec3::Zero();
    Vec3 floating = Vec3::Zero();
    bool wrong = false;  ///< `fixed` carries an ambiguity slip
};

struct FixModelState {
    std::vector<double> antenna_logits;  ///< index = antenna id - 1
    double baseline_logit = 0.0;
    double clean_slope = 1.0;
    double multipath_penalty = 0.5;
    int min_sats = 5;
};

struct EpochTruth {
    Vec3 position = Vec3::Zero();
    UnitQuaternion attitude;
    std::set<std::string> multipath_sats;
    std::vector<AntennaPair> corrupted_baselines;
    std::vector<AntennaId> wrong_fix_antennas;
    FixModelState fix_model;
    std::vector<FixCandidate> antenna_candidates;   ///< index = antenna id - 1
    std::vector<FixCandidate> baseline_candidates;  ///< parallel to EpochRecord::baselines
};

struct EpochRecord {
    double t = 0.0;
    std::vector<FixSolution> fixes;
    std::vector<VectorObservation> baselines;
    std::vector<SnrRow> snr_rows;
    std::optional<EpochTruth> truth;
};

/// Structural checks on ids, baseline pairs and SNR rows.
void validate(const EpochRecord& epoch);

/// Fix and baseline outcomes of a simulated epoch when `excluded` satellites
/// are dropped from every solution set. Requires the truth channel.
struct RequeryOutcome {
    std::vector<FixSolution> fixes;
    std::vector<VectorObservation> baselines;
};

RequeryOutcome requery_outcomes(const EpochRecord& epoch, const std::set<std::string>& excluded);

double logistic(double x);
double logit(double p);

class Simulator {
public:
    /// Validates the scenario; throws ValidationError before any epoch is produced.
    explicit Simulator(ScenarioConfig config);

    std::size_t epoch_count() const { return config_.epoch_count(); }

    /// Epoch k depends only on (config, k): streams can be regenerated piecewise.
    EpochRecord epoch(std::size_t k) const;

    /// Truth pose of epoch k.
    Pose truth_pose(std::size_t k) const;

    const ScenarioConfig& config() const { return config_; }
    const FixModelState& fix_model() const { return model_; }

private:
    ScenarioConfig config_;
    FixModelState model_;
    std::vector<double> sat_phase_rad_;
    std::vector<bool> sat_multipath_;
    int nominal_clean_ = 0;
    int nominal_multipath_ = 0;
};

std::vector<EpochRecord> simulate(const ScenarioConfig& config);

/// Scanner revolutions at every epoch time of a WAYPOINT scenario, computed
/// by exact ray casting against the ground plane and reflector discs.
std::vector<ScanLine> scan_stream(const ScenarioConfig& config, const ScannerModel& scanner);

/// First-order Gauss-Markov pose errors (stationary per-axis SDs).
struct PoseErrorModel {
    double sigma_position = 0.0;  ///< [m]
    double sigma_attitude = 0.0;  ///< [rad], per rotation-vector axis
    double correlation_time_s = 0.0;  ///< 0 gives white errors
};

std::vector<Pose> perturb_poses(std::span<const Pose> truth, const PoseErrorModel& model, std::uint64_t seed);

}  // namespace mgp

#endif  // MGP_SIMULATOR_HPP
