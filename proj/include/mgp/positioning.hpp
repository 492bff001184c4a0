/**
 * @file positioning.hpp
 * @brief Hybrid fusion of per-antenna RTK fix solutions into one platform position.
 *
 * Every FIXED antenna position is moved to the platform origin with its
 * lever arm rotated by the current attitude, and the results are averaged
 * without weighting. FLOAT and NONE solutions never contribute.
 */

#ifndef MGP_POSITIONING_HPP
#define MGP_POSITIONING_HPP

#include "mgp/core.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mgp {

enum class FixStatus { FIXED, FLOAT, NONE };

std::string_view to_string(FixStatus status);
FixStatus fix_status_from_string(std::string_view name);

struct FixSolution {
    AntennaId antenna_id = 0;
    std::optional<Vec3> p;  ///< ENU [m]; empty iff status == NONE
    FixStatus status = FixStatus::NONE;
    int sats_used = 0;
};

void validate(const FixSolution& fix);

struct PositionSolution {
    std::optional<Vec3> p;  ///< platform origin, ENU [m]
    int n_used = 0;
    std::vector<AntennaId> contributing_antennas;
    bool available = false;
};

/// p = mean over FIXED antennas of (p_i - R_eb b_i).
///
/// Without an attitude the lever arms cannot be rotated, so only a FIXED
/// antenna sitting at the body origin (b = 0) can be used.
PositionSolution hybrid_position(std::span<const FixSolution> fixes,
                                 const std::optional<UnitQuaternion>& attitude,
                                 const AntennaLayout& layout);

}  // namespace mgp

#endif  // MGP_POSITIONING_HPP
