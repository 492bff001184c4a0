/**
 * @file multipath.hpp
 * @brief Multipath detection from SNR consistency across antennas.
 *
 * Antennas a meter apart see a line-of-sight satellite with nearly the same
 * SNR, while reflected signals fade at different times on each antenna. A
 * satellite whose SNR spread across antennas exceeds a threshold is flagged.
 */

#ifndef MGP_MULTIPATH_HPP
#define MGP_MULTIPATH_HPP

#include "mgp/core.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mgp {

constexpr double kMinSnr = 10.0;  ///< [dB-Hz]
constexpr double kMaxSnr = 60.0;  ///< [dB-Hz]

struct SnrRow {
    std::string sat_id;
    std::vector<std::optional<double>> snr;  ///< index i holds antenna id i + 1
};

void validate(const SnrRow& row);

enum class MultipathVerdict { CLEAN, MULTIPATH, UNKNOWN };

std::string_view to_string(MultipathVerdict verdict);

struct SatelliteAssessment {
    std::string sat_id;
    double sigma_snr = 0.0;  ///< [dB-Hz]; 0 when fewer than two antennas
    int n_antennas = 0;
    MultipathVerdict verdict = MultipathVerdict::UNKNOWN;
};

struct MultipathReport {
    std::vector<SatelliteAssessment> satellites;  ///< input order
    std::set<std::string> excluded_sats;
};

struct MultipathParams {
    double threshold = 4.0;  ///< [dB-Hz]
    int min_count = 4;

    void validate() const;
};

/// Population standard deviation (divides by N).
double snr_sd(std::span<const double> values);

MultipathReport detect_multipath(std::span<const SnrRow> rows, const MultipathParams& params);

}  // namespace mgp

#endif  // MGP_MULTIPATH_HPP
