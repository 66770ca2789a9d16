#include "creepuq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "creepuq/rng.hpp"

namespace creepuq {

int Dataset::feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
        if (feature_names[i] == name) return static_cast<int>(i);
    return -1;
}

Dataset Dataset::rows(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.feature_names = feature_names;
    out.target_name = target_name;
    out.target_transformed = target_transformed;
    out.normalization_bounds = normalization_bounds;
    out.metadata = metadata;
    std::size_t d = feature_count();
    out.features = Tensor({idx.size(), d});
    out.target.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::size_t src = idx[r];
        if (src >= size()) throw std::out_of_range("Dataset::rows: index out of range");
        for (std::size_t c = 0; c < d; ++c) out.features.at(r, c) = features.at(src, c);
        out.target.push_back(target[src]);
    }
    return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0' && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file: " + path);
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    int target_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == target_column) target_idx = static_cast<int>(i);
    if (target_idx < 0)
        throw std::runtime_error("load_csv: missing target column '" + target_column + "' in " + path);

    Dataset ds;
    ds.target_name = target_column;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (static_cast<int>(i) != target_idx) ds.feature_names.push_back(header[i]);

    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv: row " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        bool empty_cell = false;
        for (const auto& c : cells)
            if (trim(c).empty()) { empty_cell = true; break; }
        if (empty_cell) {
            ++ds.dropped_rows;
            continue;
        }
        double tv = 0.0;
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v;
            if (!parse_number(trim(cells[i]), v))
                throw std::runtime_error("load_csv: non-numeric cell at row " + std::to_string(line_no) +
                                         ", column '" + header[i] + "': '" + cells[i] + "'");
            if (static_cast<int>(i) == target_idx) tv = v;
            else row.push_back(v);
        }
        flat.insert(flat.end(), row.begin(), row.end());
        ds.target.push_back(tv);
    }
    if (ds.target.empty()) throw std::runtime_error("load_csv: zero usable rows in " + path);
    ds.features = Tensor({ds.target.size(), ds.feature_names.size()}, std::move(flat));
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open for write: " + path);
    for (std::size_t c = 0; c < ds.feature_names.size(); ++c) out << ds.feature_names[c] << ",";
    out << ds.target_name << "\n";
    char buf[40];
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.feature_count(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features.at(r, c));
            out << buf << ",";
        }
        std::snprintf(buf, sizeof(buf), "%.17g", ds.target[r]);
        out << buf << "\n";
    }
}

Dataset apply_log10_target(const Dataset& ds) {
    if (ds.target_transformed)
        throw std::runtime_error("apply_log10_target: target already transformed");
    Dataset out = ds;
    for (std::size_t i = 0; i < out.target.size(); ++i) {
        if (out.target[i] <= 0.0)
            throw std::runtime_error("apply_log10_target: non-positive target at index " +
                                     std::to_string(i));
        out.target[i] = std::log10(out.target[i]);
    }
    out.target_transformed = true;
    return out;
}

std::vector<std::pair<double, double>> fit_normalization(const Dataset& ds) {
    if (ds.size() < 2) throw std::runtime_error("fit_normalization: need at least 2 rows");
    std::size_t d = ds.feature_count();
    std::vector<std::pair<double, double>> bounds(d);
    for (std::size_t c = 0; c < d; ++c) {
        double lo = ds.features.at(0, c), hi = lo;
        for (std::size_t r = 1; r < ds.size(); ++r) {
            double v = ds.features.at(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        bounds[c] = {lo, hi};
    }
    return bounds;
}

Dataset apply_normalization(const Dataset& ds,
                            const std::vector<std::pair<double, double>>& bounds) {
    if (bounds.size() != ds.feature_count())
        throw std::runtime_error("apply_normalization: bounds/column count mismatch");
    Dataset out = ds;
    for (std::size_t c = 0; c < bounds.size(); ++c) {
        auto [lo, hi] = bounds[c];
        double span = hi - lo;
        for (std::size_t r = 0; r < out.size(); ++r) {
            double v = out.features.at(r, c);
            out.features.at(r, c) = (span == 0.0) ? 0.0 : (v - lo) / span;
        }
    }
    out.normalization_bounds = bounds;
    return out;
}

Dataset invert_normalization(const Dataset& ds) {
    if (!ds.normalization_bounds)
        throw std::runtime_error("invert_normalization: dataset is not normalized");
    const auto& bounds = *ds.normalization_bounds;
    Dataset out = ds;
    for (std::size_t c = 0; c < bounds.size(); ++c) {
        auto [lo, hi] = bounds[c];
        double span = hi - lo;
        for (std::size_t r = 0; r < out.size(); ++r) {
            double v = out.features.at(r, c);
            out.features.at(r, c) = (span == 0.0) ? lo : lo + v * span;
        }
    }
    out.normalization_bounds.reset();
    return out;
}

FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::runtime_error("kfold_split: fold count must be >= 2");
    if (k > n) throw std::runtime_error("kfold_split: fold count exceeds sample count");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, "kfold"));
    rng.shuffle(order);
    FoldSplit split;
    split.fold_count = k;
    split.seed = seed;
    split.assignments.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) split.assignments[order[pos]] = pos % k;
    return split;
}

Dataset generate_synthetic_creep(const SyntheticSpec& spec) {
    if (spec.n < 1) throw std::runtime_error("generate_synthetic_creep: n must be >= 1");
    if (spec.noise_sd < 0.0) throw std::runtime_error("generate_synthetic_creep: noise_sd must be >= 0");
    Rng rng(derive_seed(spec.seed, "synthetic"));

    Dataset ds;
    ds.feature_names = {"temperature", "stress", "Ni", "Cr", "Mn", "Mo"};
    ds.target_name = "rupture_life";
    ds.features = Tensor({spec.n, ds.feature_names.size()});
    ds.target.resize(spec.n);

    const auto& c = spec.stress_poly;
    for (std::size_t i = 0; i < spec.n; ++i) {
        double temperature = rng.uniform(873.0, 1073.0);
        double stress = rng.uniform(40.0, 300.0);
        double ni = rng.uniform(8.0, 14.0);
        double cr = rng.uniform(16.0, 18.0);
        double mn = rng.uniform(1.0, 2.0);
        double mo = rng.uniform(2.0, 3.0);
        double x = std::log10(stress);
        double fs = c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        double log_tf = fs / temperature - spec.c_lm;
        if (spec.noise_sd > 0.0) log_tf += rng.normal(0.0, spec.noise_sd);
        ds.features.at(i, 0) = temperature;
        ds.features.at(i, 1) = stress;
        ds.features.at(i, 2) = ni;
        ds.features.at(i, 3) = cr;
        ds.features.at(i, 4) = mn;
        ds.features.at(i, 5) = mo;
        ds.target[i] = std::pow(10.0, log_tf);
    }

    ds.metadata["generator"] = {
        {"kind", "larson_miller"},
        {"c_lm", spec.c_lm},
        {"stress_poly", {c[0], c[1], c[2], c[3]}},
        {"noise_sd", spec.noise_sd},
        {"seed", spec.seed},
        {"temperature_unit", "kelvin"},
    };
    ds.metadata["temperature_unit"] = "kelvin";
    return ds;
}

}  // namespace creepuq
