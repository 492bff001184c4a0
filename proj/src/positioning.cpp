#include "mgp/positioning.hpp"

namespace mgp {

std::string_view to_string(FixStatus status)
{
    switch (status) {
    case FixStatus::FIXED: return "FIXED";
    case FixStatus::FLOAT: return "FLOAT";
    case FixStatus::NONE: return "NONE";
    }
    return "NONE";
}

FixStatus fix_status_from_string(std::string_view name)
{
    if (name == "FIXED") return FixStatus::FIXED;
    if (name == "FLOAT") return FixStatus::FLOAT;
    if (name == "NONE") return FixStatus::NONE;
    throw ValidationError("unknown fix status '" + std::string(name) + "'");
}

void validate(const FixSolution& fix)
{
    if (fix.status == FixStatus::NONE && fix.p)
        throw ValidationError("antenna " + std::to_string(fix.antenna_id) + " has a position but status NONE");
    if (fix.status != FixStatus::NONE && !fix.p)
        throw ValidationError("antenna " + std::to_string(fix.antenna_id) + " is missing its position");
    if (fix.p && !fix.p->allFinite())
        throw ValidationError("antenna " + std::to_string(fix.antenna_id) + " position is not finite");
    if (fix.sats_used < 0) throw ValidationError("sats_used must be >= 0");
}

PositionSolution hybrid_position(std::span<const FixSolution> fixes,
                                 const std::optional<UnitQuaternion>& attitude,
                                 const AntennaLayout& layout)
{
    PositionSolution out;
    Vec3 sum = Vec3::Zero();
    for (const FixSolution& fix : fixes) {
        validate(fix);
        if (fix.status != FixStatus::FIXED) continue;
        const Vec3& lever = layout.position(fix.antenna_id);
        if (!attitude && lever.squaredNorm() != 0.0) continue;

        sum += attitude ? Vec3(*fix.p - attitude->rotate(lever)) : *fix.p;
        out.contributing_antennas.push_back(fix.antenna_id);
        ++out.n_used;
    }
    if (out.n_used > 0) {
        out.p = sum / static_cast<double>(out.n_used);
        out.available = true;
    }
    return out;
}

}  // namespace mgp
