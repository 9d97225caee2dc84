#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtbo {

using Vec = std::vector<double>;

enum class Sense { Minimize, Maximize };

/// Axis-aligned continuous box domain. Bounds are in original problem
/// coordinates; everything downstream of normalize_point works in [0,1]^dim.
struct SearchDomain {
    int dim = 0;
    Vec lower;
    Vec upper;

    SearchDomain() = default;
    SearchDomain(Vec lo, Vec hi);

    bool operator==(const SearchDomain&) const = default;
};

/// One evaluated point. `x` is stored in normalized unit-cube coordinates,
/// `y_raw` in the original scale but maximization sense (larger is better),
/// `y_norm` min-max normalized within its task.
struct Sample {
    Vec x;
    double y_raw = 0.0;
    double y_norm = 0.0;
};

enum class TaskRole { Source, Target };

/// One task's evaluated samples. Source datasets are immutable after load;
/// the target dataset grows append-only during a run, with running extrema
/// so y_norm can be refreshed as new evaluations arrive.
struct TaskDataset {
    std::string task_id;
    TaskRole role = TaskRole::Source;
    SearchDomain domain;
    std::vector<Sample> samples;
    double y_min_raw = 0.0;
    double y_max_raw = 0.0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    /// Append a sample given in normalized coordinates and maximization-sense
    /// raw value; updates extrema and re-normalizes the whole task.
    void append(const Vec& x_norm, double y_raw_max_sense, bool normalize = true);
};

Vec normalize_point(const Vec& x_orig, const SearchDomain& domain);
Vec denormalize_point(const Vec& x_norm, const SearchDomain& domain);

/// Loader-side normalization: no clamping, so validate_dataset can still see
/// out-of-bounds records. Clamp with clamp_to_unit before optimization.
Vec normalize_point_unclamped(const Vec& x_orig, const SearchDomain& domain);
void clamp_to_unit(TaskDataset& dataset);

/// Per-task min-max normalization of y_raw into y_norm. Constant tasks map
/// to 0.5. `enabled = false` copies y_raw through (literal-equation mode).
void normalize_objectives(TaskDataset& dataset, bool enabled = true);

struct ValidationIssue {
    enum class Kind { NonFinite, OutOfBounds, DimensionMismatch, Duplicate };
    Kind kind;
    std::size_t record;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

/// Structural checks on a dataset against a domain. Everything found is
/// reported, nothing is rejected (ragged records are rejected earlier, at
/// parse time). Points are checked in original coordinates.
ValidationReport validate_dataset(const TaskDataset& dataset, const SearchDomain& domain);

// Dataset file formats (original coordinates, maximization sense).
// JSONL: a header line {"task_id","dim","lower","upper"} then one
// {"x":[...],"y":v} record per line. CSV fallback: x_0..x_{d-1},y columns,
// bounds supplied by the caller.
TaskDataset load_dataset_jsonl(const std::string& path);
TaskDataset load_dataset_csv(const std::string& path, const SearchDomain& domain,
                             const std::string& task_id);
void save_dataset_jsonl(const TaskDataset& dataset, const std::string& path);

/// Maximization-sense value of an original-sense objective value.
inline double to_max_sense(double y_orig, Sense sense) {
    return sense == Sense::Minimize ? -y_orig : y_orig;
}
inline double from_max_sense(double y_max, Sense sense) {
    return sense == Sense::Minimize ? -y_max : y_max;
}

}  // namespace mtbo
