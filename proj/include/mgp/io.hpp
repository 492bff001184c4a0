/**
 * @file io.hpp
 * @brief Readers and writers for the files used by the command-line tool.
 *
 * Streams start with a header line {"format": ..., "version": 1} and carry
 * one record per line. Doubles are written in shortest round-trip form so
 * a read/write cycle is lossless.
 */

#ifndef MGP_IO_HPP
#define MGP_IO_HPP

#include "mgp/mapping.hpp"
#include "mgp/pipeline.hpp"
#include "mgp/simulator.hpp"

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mgp {

/// Unreadable or unwritable files and malformed stream headers.
struct IoError : Error {
    using Error::Error;
};

namespace io {

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

/// Throws IoError when the file cannot be read, ConfigurationError for
/// malformed JSON or unknown keys, ValidationError for out-of-range values.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(std::string_view json_text);

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig parse_pipeline_config(std::string_view json_text);

struct CalibrationFile {
    MountCalibration calib;
    double max_pose_gap = kDefaultMaxPoseGap;
};

CalibrationFile load_calibration(const std::string& path);
CalibrationFile parse_calibration(std::string_view json_text);

struct ReflectorFile {
    std::vector<Vec3> reflectors;
    double cluster_radius = 0.5;
    int min_hits = 3;
};

ReflectorFile load_reflectors(const std::string& path);
ReflectorFile parse_reflectors(std::string_view json_text);

/// Parses "1,3,5".
std::vector<AntennaId> parse_antenna_list(std::string_view text);

// ---------------------------------------------------------------------------
// Epoch stream
// ---------------------------------------------------------------------------

std::string epoch_to_json(const EpochRecord& epoch);
/// Throws ValidationError on malformed records.
EpochRecord epoch_from_json(std::string_view line);

class EpochWriter {
public:
    explicit EpochWriter(std::ostream& out);
    void write(const EpochRecord& epoch);

private:
    std::ostream& out_;
};

class EpochReader {
public:
    /// Reads and checks the header line; throws IoError if it is missing or wrong.
    explicit EpochReader(std::istream& in);

    /// False at end of stream. A malformed line throws ValidationError and is
    /// consumed, so reading can continue with the next record.
    bool next(EpochRecord& epoch);

    std::size_t line_number() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

// ---------------------------------------------------------------------------
// Scan stream
// ---------------------------------------------------------------------------

void write_scan_header(std::ostream& out);
void write_scan_line(std::ostream& out, const ScanLine& line);
std::vector<ScanLine> read_scan_stream(std::istream& in);

// ---------------------------------------------------------------------------
// Poses and clouds
// ---------------------------------------------------------------------------

/// Rows with both a position and an attitude; other rows are skipped.
std::vector<Pose> read_pose_csv(std::istream& in);

/// ".bin" selects little-endian 3 x float64 + uint8 records, anything else
/// ASCII "E N U flag" lines.
void write_cloud(const std::string& path, std::span<const GeoPoint> cloud);
std::vector<GeoPoint> read_cloud(const std::string& path);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Percentages rounded to one decimal, undefined values as null.
std::string metrics_to_json(const MetricsReport& report);
std::string evaluation_to_json(const ReflectorEvaluation& evaluation, const ReflectorFile& setup);

/// Whole-file helpers throwing IoError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace io
}  // namespace mgp

#endif  // MGP_IO_HPP
