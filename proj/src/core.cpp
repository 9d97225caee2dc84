#include "core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mtbo {

using nlohmann::json;

SearchDomain::SearchDomain(Vec lo, Vec hi) : dim(static_cast<int>(lo.size())), lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("SearchDomain: bounds must be non-empty and of equal size");
    for (std::size_t d = 0; d < lower.size(); ++d) {
        if (!(lower[d] < upper[d]))
            throw std::invalid_argument("SearchDomain: lower[" + std::to_string(d) + "] must be < upper");
    }
}

Vec normalize_point(const Vec& x_orig, const SearchDomain& domain) {
    if (static_cast<int>(x_orig.size()) != domain.dim)
        throw std::invalid_argument("normalize_point: dimension mismatch");
    Vec z(x_orig.size());
    for (std::size_t d = 0; d < x_orig.size(); ++d) {
        if (!std::isfinite(x_orig[d]))
            throw std::invalid_argument("normalize_point: non-finite coordinate");
        const double t = (x_orig[d] - domain.lower[d]) / (domain.upper[d] - domain.lower[d]);
        z[d] = std::clamp(t, 0.0, 1.0);
    }
    return z;
}

Vec denormalize_point(const Vec& x_norm, const SearchDomain& domain) {
    if (static_cast<int>(x_norm.size()) != domain.dim)
        throw std::invalid_argument("denormalize_point: dimension mismatch");
    Vec x(x_norm.size());
    for (std::size_t d = 0; d < x_norm.size(); ++d) {
        const double t = std::clamp(x_norm[d], 0.0, 1.0);
        x[d] = domain.lower[d] + t * (domain.upper[d] - domain.lower[d]);
    }
    return x;
}

Vec normalize_point_unclamped(const Vec& x_orig, const SearchDomain& domain) {
    if (static_cast<int>(x_orig.size()) != domain.dim)
        throw std::invalid_argument("normalize_point: dimension mismatch");
    Vec z(x_orig.size());
    for (std::size_t d = 0; d < x_orig.size(); ++d)
        z[d] = (x_orig[d] - domain.lower[d]) / (domain.upper[d] - domain.lower[d]);
    return z;
}

void clamp_to_unit(TaskDataset& dataset) {
    for (auto& s : dataset.samples)
        for (auto& v : s.x) v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.5;
}

void normalize_objectives(TaskDataset& dataset, bool enabled) {
    if (dataset.empty()) return;
    double lo = dataset.samples.front().y_raw;
    double hi = lo;
    for (const auto& s : dataset.samples) {
        lo = std::min(lo, s.y_raw);
        hi = std::max(hi, s.y_raw);
    }
    dataset.y_min_raw = lo;
    dataset.y_max_raw = hi;
    for (auto& s : dataset.samples) {
        if (!enabled)
            s.y_norm = s.y_raw;
        else if (hi == lo)
            s.y_norm = 0.5;
        else
            s.y_norm = (s.y_raw - lo) / (hi - lo);
    }
}

void TaskDataset::append(const Vec& x_norm, double y_raw_max_sense, bool normalize) {
    if (!samples.empty() && samples.front().x.size() != x_norm.size())
        throw std::invalid_argument("TaskDataset::append: dimension mismatch");
    samples.push_back(Sample{x_norm, y_raw_max_sense, 0.0});
    normalize_objectives(*this, normalize);
}

std::string ValidationReport::to_string() const {
    if (issues.empty()) return "ok";
    std::ostringstream os;
    for (const auto& i : issues) os << "record " << i.record << ": " << i.message << "\n";
    return os.str();
}

ValidationReport validate_dataset(const TaskDataset& dataset, const SearchDomain& domain) {
    ValidationReport report;
    std::map<Vec, std::size_t> seen;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        if (static_cast<int>(s.x.size()) != domain.dim) {
            report.issues.push_back({ValidationIssue::Kind::DimensionMismatch, i,
                                     "dimension " + std::to_string(s.x.size()) + " != domain dim " +
                                         std::to_string(domain.dim)});
            continue;
        }
        bool finite = std::isfinite(s.y_raw);
        for (double v : s.x) finite = finite && std::isfinite(v);
        if (!finite) {
            report.issues.push_back({ValidationIssue::Kind::NonFinite, i, "non-finite value"});
            continue;
        }
        for (int d = 0; d < domain.dim; ++d) {
            if (s.x[d] < 0.0 || s.x[d] > 1.0) {
                report.issues.push_back({ValidationIssue::Kind::OutOfBounds, i,
                                         "coordinate " + std::to_string(d) +
                                             " outside box; suggest clamping to [" +
                                             std::to_string(domain.lower[d]) + ", " +
                                             std::to_string(domain.upper[d]) + "]"});
                break;
            }
        }
        auto [it, inserted] = seen.emplace(s.x, i);
        if (!inserted)
            report.issues.push_back({ValidationIssue::Kind::Duplicate, i,
                                     "duplicate of record " + std::to_string(it->second)});
    }
    return report;
}

TaskDataset load_dataset_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);

    json header = json::parse(line);
    TaskDataset ds;
    ds.task_id = header.at("task_id").get<std::string>();
    ds.role = TaskRole::Source;
    ds.domain = SearchDomain(header.at("lower").get<Vec>(), header.at("upper").get<Vec>());
    const int dim = header.at("dim").get<int>();
    if (dim != ds.domain.dim) throw std::runtime_error("dataset header dim disagrees with bounds: " + path);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec = json::parse(line);
        Vec x = rec.at("x").get<Vec>();
        if (static_cast<int>(x.size()) != dim)
            throw std::runtime_error("ragged record at line " + std::to_string(lineno) + " in " + path);
        const double y = rec.at("y").get<double>();
        ds.samples.push_back(Sample{normalize_point_unclamped(x, ds.domain), y, 0.0});
    }
    normalize_objectives(ds);
    return ds;
}

TaskDataset load_dataset_csv(const std::string& path, const SearchDomain& domain, const std::string& task_id) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    TaskDataset ds;
    ds.task_id = task_id;
    ds.domain = domain;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            // optional header row
            if (!cells.empty() && (cells[0] == "x_0" || cells[0] == "x0")) continue;
        }
        if (static_cast<int>(cells.size()) != domain.dim + 1)
            throw std::runtime_error("ragged CSV row at line " + std::to_string(lineno) + " in " + path);
        Vec x(domain.dim);
        for (int d = 0; d < domain.dim; ++d) x[d] = std::stod(cells[d]);
        const double y = std::stod(cells.back());
        ds.samples.push_back(Sample{normalize_point_unclamped(x, domain), y, 0.0});
    }
    normalize_objectives(ds);
    return ds;
}

void save_dataset_jsonl(const TaskDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    json header = {{"task_id", dataset.task_id},
                   {"dim", dataset.domain.dim},
                   {"lower", dataset.domain.lower},
                   {"upper", dataset.domain.upper}};
    out << header.dump() << "\n";
    for (const auto& s : dataset.samples) {
        json rec = {{"x", denormalize_point(s.x, dataset.domain)}, {"y", s.y_raw}};
        out << rec.dump() << "\n";
    }
}

}  // namespace mtbo
