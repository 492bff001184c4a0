#include "mgp/multipath.hpp"

#include <cmath>

namespace mgp {

void validate(const SnrRow& row)
{
    if (row.sat_id.empty()) throw ValidationError("SNR row without satellite id");
    int present = 0;
    for (const auto& value : row.snr) {
        if (!value) continue;
        if (!std::isfinite(*value) || *value < kMinSnr || *value > kMaxSnr)
            throw ValidationError("SNR " + std::to_string(*value) + " of " + row.sat_id +
                                  " is outside [10, 60] dB-Hz");
        ++present;
    }
    if (present == 0) throw ValidationError("SNR row " + row.sat_id + " has no values");
}

std::string_view to_string(MultipathVerdict verdict)
{
    switch (verdict) {
    case MultipathVerdict::CLEAN: return "CLEAN";
    case MultipathVerdict::MULTIPATH: return "MULTIPATH";
    case MultipathVerdict::UNKNOWN: return "UNKNOWN";
    }
    return "UNKNOWN";
}

void MultipathParams::validate() const
{
    if (!(threshold > 0.0)) throw ValidationError("multipath threshold must be > 0");
    if (min_count < 2) throw ValidationError("multipath min_count must be >= 2");
}

double snr_sd(std::span<const double> values)
{
    if (values.size() < 2) throw InsufficientDataError("SNR spread needs at least two antennas");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n);
}

MultipathReport detect_multipath(std::span<const SnrRow> rows, const MultipathParams& params)
{
    params.validate();
    MultipathReport report;
    report.satellites.reserve(rows.size());
    std::vector<double> values;
    for (const SnrRow& row : rows) {
        validate(row);
        values.clear();
        for (const auto& v : row.snr)
            if (v) values.push_back(*v);

        SatelliteAssessment a;
        a.sat_id = row.sat_id;
        a.n_antennas = static_cast<int>(values.size());
        a.sigma_snr = values.size() >= 2 ? snr_sd(values) : 0.0;
        if (a.n_antennas < params.min_count)
            a.verdict = MultipathVerdict::UNKNOWN;
        else if (a.sigma_snr > params.threshold)
            a.verdict = MultipathVerdict::MULTIPATH;
        else
            a.verdict = MultipathVerdict::CLEAN;

        if (a.verdict == MultipathVerdict::MULTIPATH) report.excluded_sats.insert(a.sat_id);
        report.satellites.push_back(std::move(a));
    }
    return report;
}

}  // namespace mgp
