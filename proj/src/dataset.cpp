#include "fatigue/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fatigue/errors.hpp"
#include "fatigue/io_util.hpp"
#include "fatigue/rng.hpp"

namespace fatigue {

const char* const kCsvHeader =
    "binder_content,air_voids,strain_microstrain,temperature_c,frequency_hz,"
    "fatigue_life_cycles,source";

namespace {

constexpr const char* kColumnNames[7] = {
    "binder_content", "air_voids",         "strain_microstrain", "temperature_c",
    "frequency_hz",   "fatigue_life_cycles", "source",
};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    return s.substr(b, e - b + 1);
}

double parse_field(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string s = trim(raw);
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty() ||
        !std::isfinite(value)) {
        throw DataError("malformed row: cannot parse column " +
                        std::string(kColumnNames[col]) + " at row " +
                        std::to_string(row));
    }
    return value;
}

// p-th percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) {
        return values[0];
    }
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population convention (divide by n)
};

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    const double n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        ss += d * d;
    }
    out.std = std::sqrt(ss / n);
    return out;
}

double scale_value(double x, const ScalerParams::Range& r) {
    const double span = r.max - r.min;
    if (span == 0.0) {
        return 0.0; // constant feature carries no information
    }
    return (x - r.min) / span;
}

} // namespace

bool Sample::matches_fixed_conditions() const {
    const bool temp_ok = std::abs(temperature_c - 20.0) < 1e-9 ||
                         std::abs(temperature_c - 21.1) < 1e-9;
    const bool freq_ok = std::abs(frequency_hz - 10.0) < 1e-9;
    return temp_ok && freq_ok;
}

void FilterConfig::validate() const {
    if (!(nf_lower_bound > 0.0) || !(nf_upper_bound > 0.0)) {
        throw ConfigError("fatigue-life bounds must be positive");
    }
    if (!(nf_lower_bound < nf_upper_bound)) {
        throw ConfigError("nf_lower_bound must be below nf_upper_bound");
    }
    if (!(z_threshold > 0.0)) {
        throw ConfigError("z_threshold must be positive");
    }
    if (percentile_bounds) {
        if (!(lower_percentile >= 0.0 && upper_percentile <= 100.0 &&
              lower_percentile < upper_percentile)) {
            throw ConfigError("percentiles must satisfy 0 <= lower < upper <= 100");
        }
    }
}

std::vector<Sample> load_csv(const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty file: " + path);
    }
    if (trim(line) != kCsvHeader) {
        throw DataError("unexpected CSV header in " + path);
    }
    std::vector<Sample> samples;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        row += 1;
        const auto fields = split_line(line);
        if (fields.size() != 7) {
            throw DataError("malformed row: expected 7 fields, got " +
                            std::to_string(fields.size()) + " at row " +
                            std::to_string(row));
        }
        Sample s;
        s.binder_content = parse_field(fields[0], row, 0);
        s.air_voids = parse_field(fields[1], row, 1);
        s.strain = parse_field(fields[2], row, 2);
        s.temperature_c = parse_field(fields[3], row, 3);
        s.frequency_hz = parse_field(fields[4], row, 4);
        s.fatigue_life = parse_field(fields[5], row, 5);
        s.source_id = trim(fields[6]);
        if (s.temperature_c == 70.0) {
            s.temperature_c = 21.1; // Fahrenheit leftover in one source
        }
        if (s.fatigue_life <= 0.0) {
            throw DataError("non-positive fatigue life at row " + std::to_string(row));
        }
        if (!(s.binder_content > 0.0 && s.binder_content < 100.0)) {
            throw DataError("binder_content out of range at row " + std::to_string(row));
        }
        if (!(s.air_voids >= 0.0 && s.air_voids < 100.0)) {
            throw DataError("air_voids out of range at row " + std::to_string(row));
        }
        if (!(s.strain > 0.0)) {
            throw DataError("non-positive strain at row " + std::to_string(row));
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

std::string samples_to_csv(const std::vector<Sample>& samples) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const Sample& s : samples) {
        out << format_double(s.binder_content) << ',' << format_double(s.air_voids)
            << ',' << format_double(s.strain) << ',' << format_double(s.temperature_c)
            << ',' << format_double(s.frequency_hz) << ','
            << format_double(s.fatigue_life) << ',' << s.source_id << '\n';
    }
    return out.str();
}

FilterResult filter_outliers(const std::vector<Sample>& samples,
                             const FilterConfig& cfg) {
    cfg.validate();
    if (samples.empty()) {
        throw DataError("empty dataset");
    }

    FilterResult result;
    result.applied_lower = cfg.nf_lower_bound;
    result.applied_upper = cfg.nf_upper_bound;
    if (cfg.percentile_bounds) {
        std::vector<double> lives;
        lives.reserve(samples.size());
        for (const Sample& s : samples) {
            lives.push_back(s.fatigue_life);
        }
        result.applied_lower = percentile(lives, cfg.lower_percentile);
        result.applied_upper = percentile(std::move(lives), cfg.upper_percentile);
    }

    // Stage 1: fatigue-life bounds, inclusive on both ends.
    std::vector<Sample> survivors;
    survivors.reserve(samples.size());
    for (const Sample& s : samples) {
        if (s.fatigue_life < result.applied_lower) {
            result.rejected.push_back({s, "stage 1: fatigue_life below lower bound"});
        } else if (s.fatigue_life > result.applied_upper) {
            result.rejected.push_back({s, "stage 1: fatigue_life above upper bound"});
        } else {
            survivors.push_back(s);
        }
    }
    if (survivors.empty()) {
        throw DataError("empty dataset after filtering");
    }

    // Stage 2: z-scores on the stage-1 survivors.
    const std::size_t n = survivors.size();
    std::array<std::vector<double>, 4> columns;
    for (auto& c : columns) {
        c.reserve(n);
    }
    for (const Sample& s : survivors) {
        columns[0].push_back(s.binder_content);
        columns[1].push_back(s.air_voids);
        columns[2].push_back(s.strain);
        columns[3].push_back(s.fatigue_life);
    }
    constexpr const char* kVarNames[4] = {"binder_content", "air_voids",
                                          "strain", "fatigue_life"};
    std::array<MeanStd, 4> stats;
    for (std::size_t v = 0; v < 4; ++v) {
        stats[v] = mean_std(columns[v]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::string offending;
        for (std::size_t v = 0; v < 4; ++v) {
            if (stats[v].std == 0.0) {
                continue; // constant column cannot produce outliers
            }
            const double z = (columns[v][i] - stats[v].mean) / stats[v].std;
            if (std::abs(z) > cfg.z_threshold) {
                if (!offending.empty()) {
                    offending += ", ";
                }
                offending += kVarNames[v];
            }
        }
        if (offending.empty()) {
            result.retained.push_back(survivors[i]);
        } else {
            result.rejected.push_back(
                {survivors[i], "stage 2: z-score exceeds threshold for " + offending});
        }
    }
    if (result.retained.empty()) {
        throw DataError("empty dataset after filtering");
    }
    return result;
}

ScalerParams fit_scaler(const std::vector<Sample>& train) {
    if (train.empty()) {
        throw DataError("cannot fit scaler on empty data");
    }
    ScalerParams p;
    p.binder = {train[0].binder_content, train[0].binder_content};
    p.voids = {train[0].air_voids, train[0].air_voids};
    p.strain = {train[0].strain, train[0].strain};
    for (const Sample& s : train) {
        p.binder.min = std::min(p.binder.min, s.binder_content);
        p.binder.max = std::max(p.binder.max, s.binder_content);
        p.voids.min = std::min(p.voids.min, s.air_voids);
        p.voids.max = std::max(p.voids.max, s.air_voids);
        p.strain.min = std::min(p.strain.min, s.strain);
        p.strain.max = std::max(p.strain.max, s.strain);
    }
    return p;
}

Matrix transform(const std::vector<Sample>& samples, const ScalerParams& params) {
    Matrix X(samples.size(), 3);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto row = transform_one(samples[i].binder_content,
                                       samples[i].air_voids, samples[i].strain, params);
        X.at(i, 0) = row[0];
        X.at(i, 1) = row[1];
        X.at(i, 2) = row[2];
    }
    return X;
}

std::array<double, 3> transform_one(double binder, double voids, double strain,
                                    const ScalerParams& params) {
    return {scale_value(binder, params.binder), scale_value(voids, params.voids),
            scale_value(strain, params.strain)};
}

std::vector<double> fatigue_lives(const std::vector<Sample>& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        out.push_back(s.fatigue_life);
    }
    return out;
}

FoldAssignment kfold_split(std::size_t n_samples, std::size_t n_folds,
                           std::uint64_t seed) {
    if (n_folds < 2) {
        throw ConfigError("n_folds must be at least 2");
    }
    if (n_folds > n_samples) {
        throw ConfigError("n_folds exceeds sample count");
    }
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    FoldAssignment fa;
    fa.n_folds = n_folds;
    fa.seed = seed;
    fa.assignment.assign(n_samples, 0);
    const std::size_t base = n_samples / n_folds;
    const std::size_t extra = n_samples % n_folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < n_folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t j = 0; j < size; ++j) {
            fa.assignment[order[pos + j]] = f;
        }
        pos += size;
    }
    return fa;
}

} // namespace fatigue
