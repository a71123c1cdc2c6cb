#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "onsetml/error.hpp"
#include "onsetml/numerics.hpp"
#include "onsetml/rng.hpp"

namespace onsetml {

enum class Layout { h_top, h_sub };
enum class Soil { fine, medium, coarse };

inline const char* to_string(Layout l) { return l == Layout::h_top ? "h_top" : "h_sub"; }
inline const char* to_string(Soil s) {
    switch (s) {
        case Soil::fine: return "fine";
        case Soil::medium: return "medium";
        case Soil::coarse: return "coarse";
    }
    return "?";
}

/// One flume test. H-Top rows carry discharge/erosion outputs (total and six
/// 10-minute interval rates); H-Sub rows carry the binary failure outcome.
struct ExperimentRecord {
    Layout layout = Layout::h_top;
    Soil soil = Soil::fine;
    double d50_mm = 0.0;
    double d10_mm = 0.0;
    double cc = 0.0;
    double cu = 0.0;
    double contact_angle_deg = 0.0;
    double friction_angle_deg = 0.0;
    double wev_kpa = 0.0;
    double slope_deg = 0.0;
    double rain_mm_hr = 0.0;
    std::optional<double> td_l_m2;
    std::optional<double> te_g_m2;
    std::optional<std::array<double, 6>> erosion_intervals;    // g/(m^2*min)
    std::optional<std::array<double, 6>> discharge_intervals;  // L/(m^2*min)
    std::optional<int> failure;  // 0 = no failure, 1 = infinite failure

    bool operator==(const ExperimentRecord&) const = default;
};

/// The rain-gated products of Eq-style feature engineering:
/// x1 = d50*RI, x2 = wev*RI, x3 = slope*RI. All vanish when RI = 0.
struct EngineeredFeatures {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;

    Vector as_vector() const { return {x1, x2, x3}; }
};

inline EngineeredFeatures engineer_features(const ExperimentRecord& r) {
    return {r.d50_mm * r.rain_mm_hr, r.wev_kpa * r.rain_mm_hr, r.slope_deg * r.rain_mm_hr};
}

inline const std::vector<std::string>& engineered_feature_names() {
    static const std::vector<std::string> names = {"d50_ri", "wev_ri", "slope_ri"};
    return names;
}

struct ExperimentTable {
    std::vector<ExperimentRecord> records;
    std::string provenance;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// ---------------------------------------------------------------------------
// Column access
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& csv_schema() {
    static const std::vector<std::string> cols = {
        "layout", "soil", "d50_mm", "d10_mm", "cc", "cu", "contact_angle_deg",
        "friction_angle_deg", "wev_kpa", "slope_deg", "rain_mm_hr", "td_l_m2", "te_g_m2",
        "e1", "e2", "e3", "e4", "e5", "e6", "d1", "d2", "d3", "d4", "d5", "d6", "failure"};
    return cols;
}

inline bool is_known_column(const std::string& name) {
    for (const auto& c : csv_schema())
        if (c == name) return true;
    return false;
}

/// Numeric value of a named column, or nullopt when the optional output is
/// absent on this record. Throws UnknownColumn for names outside the schema
/// ("layout" and "soil" are not numeric).
inline std::optional<double> column_value(const ExperimentRecord& r, const std::string& name) {
    if (name == "d50_mm") return r.d50_mm;
    if (name == "d10_mm") return r.d10_mm;
    if (name == "cc") return r.cc;
    if (name == "cu") return r.cu;
    if (name == "contact_angle_deg") return r.contact_angle_deg;
    if (name == "friction_angle_deg") return r.friction_angle_deg;
    if (name == "wev_kpa") return r.wev_kpa;
    if (name == "slope_deg") return r.slope_deg;
    if (name == "rain_mm_hr") return r.rain_mm_hr;
    if (name == "td_l_m2") return r.td_l_m2;
    if (name == "te_g_m2") return r.te_g_m2;
    if (name == "failure")
        return r.failure ? std::optional<double>(*r.failure) : std::nullopt;
    if (name.size() == 2 && (name[0] == 'e' || name[0] == 'd') && name[1] >= '1' && name[1] <= '6') {
        const auto& series = name[0] == 'e' ? r.erosion_intervals : r.discharge_intervals;
        if (!series) return std::nullopt;
        return (*series)[static_cast<std::size_t>(name[1] - '1')];
    }
    raise(errc::unknown_column, "no numeric column named '" + name + "'");
}

/// Full column extraction; a row missing the value is a data error.
inline Vector numeric_column(const ExperimentTable& table, const std::string& name) {
    Vector out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto v = column_value(table.records[i], name);
        if (!v)
            raise(errc::bad_value,
                  "row " + std::to_string(i + 1) + " has no value for column '" + name + "'");
        out.push_back(*v);
    }
    return out;
}

inline Matrix column_matrix(const ExperimentTable& table, const std::vector<std::string>& columns) {
    Matrix m(table.size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const Vector col = numeric_column(table, columns[j]);
        for (std::size_t i = 0; i < col.size(); ++i) m(i, j) = col[i];
    }
    return m;
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-column (mean, std) transform fitted once and reusable on new data.
struct Standardizer {
    struct Column {
        std::string name;
        double mean = 0.0;
        double std = 1.0;

        bool operator==(const Column&) const = default;
    };
    std::vector<Column> columns;

    static Standardizer identity(const std::vector<std::string>& names) {
        Standardizer s;
        for (const auto& n : names) s.columns.push_back({n, 0.0, 1.0});
        return s;
    }

    std::size_t size() const { return columns.size(); }

    Vector transform_row(const Vector& raw) const {
        if (raw.size() != columns.size())
            raise(errc::dimension_mismatch, "standardizer row width mismatch");
        Vector out(raw.size());
        for (std::size_t j = 0; j < raw.size(); ++j)
            out[j] = (raw[j] - columns[j].mean) / columns[j].std;
        return out;
    }

    Vector inverse_row(const Vector& standardized) const {
        if (standardized.size() != columns.size())
            raise(errc::dimension_mismatch, "standardizer row width mismatch");
        Vector out(standardized.size());
        for (std::size_t j = 0; j < standardized.size(); ++j)
            out[j] = standardized[j] * columns[j].std + columns[j].mean;
        return out;
    }

    Matrix transform(const Matrix& raw) const {
        Matrix out(raw.rows(), raw.cols());
        if (raw.cols() != columns.size())
            raise(errc::dimension_mismatch, "standardizer matrix width mismatch");
        for (std::size_t i = 0; i < raw.rows(); ++i)
            for (std::size_t j = 0; j < raw.cols(); ++j)
                out(i, j) = (raw(i, j) - columns[j].mean) / columns[j].std;
        return out;
    }

    bool operator==(const Standardizer&) const = default;
};

struct Standardized {
    Matrix data;
    Standardizer standardizer;
};

inline Standardized standardize(const Matrix& raw, const std::vector<std::string>& names) {
    if (names.size() != raw.cols())
        raise(errc::dimension_mismatch, "standardize: one name per column required");
    Standardizer s;
    for (std::size_t j = 0; j < raw.cols(); ++j) {
        const auto ms = mean_std(raw.col(j));
        if (ms.std == 0.0) raise(errc::constant_column, "column '" + names[j] + "' is constant");
        s.columns.push_back({names[j], ms.mean, ms.std});
    }
    return {s.transform(raw), s};
}

inline Standardized standardize(const ExperimentTable& table,
                                const std::vector<std::string>& columns) {
    return standardize(column_matrix(table, columns), columns);
}

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

struct LabeledMatrix {
    std::vector<std::string> labels;
    Matrix values;
};

/// Columns of Fig-3-style correlation analysis: the nine soil/test inputs,
/// both totals, and the twelve per-interval rates.
inline const std::vector<std::string>& correlation_default_columns() {
    static const std::vector<std::string> cols = {
        "d50_mm", "d10_mm", "cc", "cu", "contact_angle_deg", "friction_angle_deg",
        "wev_kpa", "slope_deg", "rain_mm_hr", "td_l_m2", "te_g_m2",
        "e1", "e2", "e3", "e4", "e5", "e6", "d1", "d2", "d3", "d4", "d5", "d6"};
    return cols;
}

inline LabeledMatrix correlation_matrix(const ExperimentTable& table,
                                        const std::vector<std::string>& columns) {
    std::vector<Vector> cols;
    cols.reserve(columns.size());
    for (const auto& name : columns) cols.push_back(numeric_column(table, name));
    Matrix m(columns.size(), columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        m(i, i) = 1.0;
        for (std::size_t j = i + 1; j < columns.size(); ++j) {
            double r;
            try {
                r = pearson_corr(cols[i], cols[j]);
            } catch (const Error& e) {
                if (e.code() == errc::constant_column)
                    raise(errc::constant_column,
                          "correlation_matrix: column '" +
                              (mean_std(cols[i]).std == 0.0 ? columns[i] : columns[j]) +
                              "' is constant");
                throw;
            }
            m(i, j) = r;
            m(j, i) = r;
        }
    }
    return {columns, m};
}

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

/// Stringly-typed cell value for grouping/stratification.
inline std::string cell_as_string(const ExperimentRecord& r, const std::string& column) {
    if (column == "layout") return to_string(r.layout);
    if (column == "soil") return to_string(r.soil);
    const auto v = column_value(r, column);
    if (!v) return "";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

struct TrainTestSplit {
    ExperimentTable train;
    ExperimentTable test;
};

/// Round-half-up test size; stratified allocation by largest remainder when a
/// stratify column is given. Row order within each side follows the input.
inline TrainTestSplit split_train_test(const ExperimentTable& table, double test_fraction,
                                       std::uint64_t seed,
                                       const std::optional<std::string>& stratify_on = {}) {
    const std::size_t n = table.size();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        raise(errc::degenerate_split, "test fraction must lie strictly between 0 and 1");
    const auto test_n =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 0.5));
    if (test_n < 1 || test_n >= n)
        raise(errc::degenerate_split, "split of " + std::to_string(n) + " rows at fraction " +
                                          std::to_string(test_fraction) + " leaves " +
                                          std::to_string(test_n) + " test rows");

    const auto order = seeded_shuffle(n, seed);
    std::vector<bool> in_test(n, false);

    if (!stratify_on) {
        for (std::size_t i = 0; i < test_n; ++i) in_test[order[i]] = true;
    } else {
        if (*stratify_on != "layout" && *stratify_on != "soil" && !is_known_column(*stratify_on))
            raise(errc::unknown_column, "stratify column '" + *stratify_on + "' unknown");
        std::map<std::string, std::size_t> class_sizes;
        for (const auto& r : table.records) ++class_sizes[cell_as_string(r, *stratify_on)];

        // largest-remainder quotas per class, totalling exactly test_n
        std::map<std::string, std::size_t> quota;
        std::vector<std::pair<double, std::string>> remainders;
        std::size_t assigned = 0;
        for (const auto& [key, size] : class_sizes) {
            const double exact = static_cast<double>(test_n) * static_cast<double>(size) /
                                 static_cast<double>(n);
            const auto base = static_cast<std::size_t>(std::floor(exact));
            quota[key] = base;
            assigned += base;
            remainders.emplace_back(exact - static_cast<double>(base), key);
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; assigned < test_n; ++assigned, ++i)
            ++quota[remainders[i % remainders.size()].second];

        std::map<std::string, std::size_t> taken;
        for (std::size_t idx : order) {
            const std::string key = cell_as_string(table.records[idx], *stratify_on);
            if (taken[key] < quota[key]) {
                in_test[idx] = true;
                ++taken[key];
            }
        }
    }

    TrainTestSplit split;
    split.train.provenance = table.provenance;
    split.test.provenance = table.provenance;
    for (std::size_t i = 0; i < n; ++i)
        (in_test[i] ? split.test : split.train).records.push_back(table.records[i]);
    return split;
}

/// k disjoint index folds covering 0..n-1, sizes differing by at most one.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k,
                                                             std::uint64_t seed) {
    if (k < 2 || k > n)
        raise(errc::bad_fold_count,
              "k=" + std::to_string(k) + " invalid for n=" + std::to_string(n));
    const auto order = seeded_shuffle(n, seed);
    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) folds[f].push_back(order[pos++]);
    }
    return folds;
}

inline ExperimentTable subset(const ExperimentTable& table, const std::vector<std::size_t>& idx) {
    ExperimentTable out;
    out.provenance = table.provenance;
    for (std::size_t i : idx) out.records.push_back(table.records[i]);
    return out;
}

// ---------------------------------------------------------------------------
// CSV input / output
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    cells.push_back(cell);
    return cells;
}

inline std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline double parse_double_cell(const std::string& raw, std::size_t row, const std::string& col) {
    const std::string s = trimmed(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value))
        raise(errc::bad_value,
              "row " + std::to_string(row) + ", column '" + col + "': cannot parse '" + s + "'");
    return value;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Validates the cross-field invariants of a parsed record. `row` is the
/// 1-based data row used in error messages.
inline void validate_record(const ExperimentRecord& r, std::size_t row) {
    const auto fail = [&](const std::string& what) {
        raise(errc::bad_value, "row " + std::to_string(row) + ": " + what);
    };
    if (!(r.d50_mm > 0.0)) fail("d50_mm must be positive");
    if (!(r.rain_mm_hr >= 0.0)) fail("rain_mm_hr must be non-negative");
    if (!(r.slope_deg > 0.0 && r.slope_deg < 90.0)) fail("slope_deg must lie in (0, 90)");
    if (!(r.wev_kpa >= 0.0)) fail("wev_kpa must be non-negative");
    if (r.layout == Layout::h_top) {
        if (!r.td_l_m2 || !r.te_g_m2) fail("h_top rows require td_l_m2 and te_g_m2");
        if (!r.erosion_intervals || !r.discharge_intervals)
            fail("h_top rows require all six erosion and discharge interval rates");
    } else {
        if (!r.failure) fail("h_sub rows require the failure label");
    }
    if (r.failure && *r.failure != 0 && *r.failure != 1) fail("failure must be 0 or 1");
}

inline ExperimentTable load_experiments(const std::string& path,
                                        std::optional<Layout> expected_layout = {}) {
    std::ifstream in(path);
    if (!in) raise(errc::missing_artifact, "cannot open '" + path + "'");

    std::string header_line;
    if (!std::getline(in, header_line))
        raise(errc::missing_column, "'" + path + "' is empty, expected a header row");
    const auto header = detail::split_csv_line(header_line);

    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const std::string name = detail::trimmed(header[j]);
        if (!is_known_column(name))
            raise(errc::unknown_column, "unexpected column '" + name + "' in '" + path + "'");
        index[name] = j;
    }
    for (const auto& required : csv_schema())
        if (!index.count(required))
            raise(errc::missing_column, "'" + path + "' lacks column '" + required + "'");

    ExperimentTable table;
    table.provenance = path;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trimmed(line).empty()) continue;
        ++row;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            raise(errc::bad_value, "row " + std::to_string(row) + ": expected " +
                                       std::to_string(header.size()) + " cells, found " +
                                       std::to_string(cells.size()));
        const auto cell = [&](const std::string& name) -> std::string {
            return detail::trimmed(cells[index.at(name)]);
        };
        const auto num = [&](const std::string& name) {
            return detail::parse_double_cell(cell(name), row, name);
        };
        const auto opt_num = [&](const std::string& name) -> std::optional<double> {
            const std::string s = cell(name);
            if (s.empty()) return std::nullopt;
            return detail::parse_double_cell(s, row, name);
        };

        ExperimentRecord r;
        const std::string layout = cell("layout");
        if (layout == "h_top") r.layout = Layout::h_top;
        else if (layout == "h_sub") r.layout = Layout::h_sub;
        else raise(errc::bad_value, "row " + std::to_string(row) + ": unknown layout '" + layout + "'");

        const std::string soil = cell("soil");
        if (soil == "fine") r.soil = Soil::fine;
        else if (soil == "medium") r.soil = Soil::medium;
        else if (soil == "coarse") r.soil = Soil::coarse;
        else raise(errc::bad_value, "row " + std::to_string(row) + ": unknown soil '" + soil + "'");

        r.d50_mm = num("d50_mm");
        r.d10_mm = num("d10_mm");
        r.cc = num("cc");
        r.cu = num("cu");
        r.contact_angle_deg = num("contact_angle_deg");
        r.friction_angle_deg = num("friction_angle_deg");
        r.wev_kpa = num("wev_kpa");
        r.slope_deg = num("slope_deg");
        r.rain_mm_hr = num("rain_mm_hr");
        r.td_l_m2 = opt_num("td_l_m2");
        r.te_g_m2 = opt_num("te_g_m2");

        std::array<double, 6> e{}, d{};
        bool has_e = true, has_d = true;
        for (int t = 0; t < 6; ++t) {
            const auto ev = opt_num("e" + std::to_string(t + 1));
            const auto dv = opt_num("d" + std::to_string(t + 1));
            if (ev) e[static_cast<std::size_t>(t)] = *ev; else has_e = false;
            if (dv) d[static_cast<std::size_t>(t)] = *dv; else has_d = false;
        }
        if (has_e) r.erosion_intervals = e;
        if (has_d) r.discharge_intervals = d;

        const std::string failure = cell("failure");
        if (!failure.empty()) {
            const double f = detail::parse_double_cell(failure, row, "failure");
            if (f != 0.0 && f != 1.0)
                raise(errc::bad_value,
                      "row " + std::to_string(row) + ": failure must be 0 or 1, got '" + failure + "'");
            r.failure = static_cast<int>(f);
        }

        validate_record(r, row);
        if (expected_layout && r.layout != *expected_layout)
            raise(errc::layout_mismatch,
                  "row " + std::to_string(row) + " has layout " + to_string(r.layout) +
                      ", expected " + to_string(*expected_layout));
        table.records.push_back(r);
    }
    return table;
}

inline std::string experiments_to_csv(const ExperimentTable& table) {
    std::string out;
    const auto& schema = csv_schema();
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (j) out += ',';
        out += schema[j];
    }
    out += '\n';
    for (const auto& r : table.records) {
        std::vector<std::string> cells;
        cells.reserve(schema.size());
        cells.push_back(to_string(r.layout));
        cells.push_back(to_string(r.soil));
        for (const char* name : {"d50_mm", "d10_mm", "cc", "cu", "contact_angle_deg",
                                 "friction_angle_deg", "wev_kpa", "slope_deg", "rain_mm_hr"})
            cells.push_back(detail::format_double(*column_value(r, name)));
        cells.push_back(r.td_l_m2 ? detail::format_double(*r.td_l_m2) : "");
        cells.push_back(r.te_g_m2 ? detail::format_double(*r.te_g_m2) : "");
        for (int t = 0; t < 6; ++t)
            cells.push_back(r.erosion_intervals
                                ? detail::format_double((*r.erosion_intervals)[static_cast<std::size_t>(t)])
                                : "");
        for (int t = 0; t < 6; ++t)
            cells.push_back(r.discharge_intervals
                                ? detail::format_double((*r.discharge_intervals)[static_cast<std::size_t>(t)])
                                : "");
        cells.push_back(r.failure ? std::to_string(*r.failure) : "");
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j) out += ',';
            out += cells[j];
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic stand-in data
// ---------------------------------------------------------------------------

/// Factorial design of the simulated-rainfall campaign: every soil crossed
/// with every rain intensity, slope, and both layouts.
struct SynthDesign {
    struct SoilSpec {
        Soil soil;
        double d50_mm;
        double friction_angle_deg;
        double cc;
        double cu;
        double contact_angle_deg;
    };
    std::vector<SoilSpec> soils;
    std::vector<double> rain_intensities_mm_hr;
    std::vector<double> slopes_deg;

    static SynthDesign standard() {
        SynthDesign d;
        d.soils = {
            {Soil::fine, 0.20, 30.0, 0.95, 1.5, 105.0},
            {Soil::medium, 0.40, 32.0, 1.00, 1.6, 100.0},
            {Soil::coarse, 0.65, 34.0, 1.05, 1.7, 95.0},
        };
        d.rain_intensities_mm_hr = {18.0, 70.0, 120.0};
        d.slopes_deg = {20.0, 30.0};
        return d;
    }
};

/// Placeholder water entry values per soil; the real measurements are not
/// public, so callers must treat these as stand-ins.
inline std::map<Soil, double> default_wev_by_soil() {
    return {{Soil::fine, 2.0}, {Soil::medium, 1.0}, {Soil::coarse, 0.5}};
}

/// Planted response rules for the synthetic stand-in, fixed so that every
/// generated table is reproducible and the rules themselves are testable.
/// With noise_scale = 0 the responses equal the rule values exactly.
///
///   td = 11.3 - 0.46*x1 + 0.025*x2 + 0.025*x3            (+ 4.0*noise)
///   te = -15.2 - 90.7*x1 - 5.2*x2 + 2.9*x3               (+ 800*noise)
///   interval t discharge rate = td * w_t / 10,  w geometric (q = 0.8)
///   interval t erosion rate   = te * v_t / 10,  v geometric (q = 0.7)
///   failure = 1  iff  z + noise >= 0, where z applies the logistic-style
///   coefficients (-2.38, -2.39, 0.53, 4.13) to the engineered products
///   standardized over the generated h_sub rows.
namespace synth_rules {

inline double td(const EngineeredFeatures& f) {
    return 11.3 - 0.46 * f.x1 + 0.025 * f.x2 + 0.025 * f.x3;
}

inline double te(const EngineeredFeatures& f) {
    return -15.2 - 90.7 * f.x1 - 5.2 * f.x2 + 2.9 * f.x3;
}

inline std::array<double, 6> geometric_shares(double q) {
    std::array<double, 6> w{};
    double total = 0.0;
    double term = 1.0;
    for (auto& v : w) {
        v = term;
        total += term;
        term *= q;
    }
    for (auto& v : w) v /= total;
    return w;
}

constexpr double td_noise_sd = 4.0;
constexpr double te_noise_sd = 800.0;
constexpr double interval_noise_sd = 0.2;
constexpr double failure_noise_sd = 1.0;

inline const Vector& failure_coefficients() {
    static const Vector c = {-2.38, -2.39, 0.53, 4.13};  // intercept, x1, x2, x3
    return c;
}

}  // namespace synth_rules

inline ExperimentTable synth_generate(const SynthDesign& design,
                                      const std::map<Soil, double>& wev_by_soil,
                                      double noise_scale, std::uint64_t seed) {
    if (design.soils.empty() || design.rain_intensities_mm_hr.empty() || design.slopes_deg.empty())
        raise(errc::bad_design, "design must list at least one soil, rain intensity and slope");
    if (!(noise_scale >= 0.0)) raise(errc::bad_design, "noise_scale must be non-negative");
    for (const auto& s : design.soils) {
        const auto it = wev_by_soil.find(s.soil);
        if (it == wev_by_soil.end() || !(it->second > 0.0))
            raise(errc::bad_design,
                  std::string("missing or non-positive wev for soil ") + to_string(s.soil));
        if (!(s.d50_mm > 0.0)) raise(errc::bad_design, "d50 must be positive");
    }
    for (double ri : design.rain_intensities_mm_hr)
        if (!(ri >= 0.0)) raise(errc::bad_design, "rain intensity must be non-negative");
    for (double slope : design.slopes_deg)
        if (!(slope > 0.0 && slope < 90.0)) raise(errc::bad_design, "slope must lie in (0, 90)");

    SplitMix64 rng(seed);
    ExperimentTable table;
    const auto e_shares = synth_rules::geometric_shares(0.7);
    const auto d_shares = synth_rules::geometric_shares(0.8);

    // fixed cell order keeps the noise stream aligned with the design
    for (const auto layout : {Layout::h_top, Layout::h_sub}) {
        for (const auto& soil : design.soils) {
            for (double ri : design.rain_intensities_mm_hr) {
                for (double slope : design.slopes_deg) {
                    ExperimentRecord r;
                    r.layout = layout;
                    r.soil = soil.soil;
                    r.d50_mm = soil.d50_mm;
                    r.d10_mm = soil.d50_mm / 1.35;
                    r.cc = soil.cc;
                    r.cu = soil.cu;
                    r.contact_angle_deg = soil.contact_angle_deg;
                    r.friction_angle_deg = soil.friction_angle_deg;
                    r.wev_kpa = wev_by_soil.at(soil.soil);
                    r.slope_deg = slope;
                    r.rain_mm_hr = ri;

                    const auto f = engineer_features(r);
                    r.td_l_m2 = synth_rules::td(f) +
                                noise_scale * synth_rules::td_noise_sd * rng.next_gaussian();
                    r.te_g_m2 = synth_rules::te(f) +
                                noise_scale * synth_rules::te_noise_sd * rng.next_gaussian();
                    if (layout == Layout::h_top) {
                        std::array<double, 6> e{}, d{};
                        for (std::size_t t = 0; t < 6; ++t)
                            e[t] = *r.te_g_m2 * e_shares[t] / 10.0 +
                                   noise_scale * synth_rules::interval_noise_sd * rng.next_gaussian();
                        for (std::size_t t = 0; t < 6; ++t)
                            d[t] = *r.td_l_m2 * d_shares[t] / 10.0 +
                                   noise_scale * synth_rules::interval_noise_sd * rng.next_gaussian();
                        r.erosion_intervals = e;
                        r.discharge_intervals = d;
                    }
                    table.records.push_back(r);
                }
            }
        }
    }

    // Failure labels for the h_sub half: planted logistic-style score on the
    // engineered products, standardized over the h_sub rows themselves.
    std::vector<std::size_t> hsub_idx;
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table.records[i].layout == Layout::h_sub) hsub_idx.push_back(i);
    if (hsub_idx.size() >= 2) {
        Matrix products(hsub_idx.size(), 3);
        for (std::size_t i = 0; i < hsub_idx.size(); ++i) {
            const auto f = engineer_features(table.records[hsub_idx[i]]);
            products(i, 0) = f.x1;
            products(i, 1) = f.x2;
            products(i, 2) = f.x3;
        }
        Standardized st;
        try {
            st = standardize(products, engineered_feature_names());
        } catch (const Error& e) {
            raise(errc::bad_design, std::string("h_sub design degenerate: ") + e.what());
        }
        const auto& c = synth_rules::failure_coefficients();
        for (std::size_t i = 0; i < hsub_idx.size(); ++i) {
            const double z = c[0] + c[1] * st.data(i, 0) + c[2] * st.data(i, 1) +
                             c[3] * st.data(i, 2) +
                             noise_scale * synth_rules::failure_noise_sd * rng.next_gaussian();
            table.records[hsub_idx[i]].failure = z >= 0.0 ? 1 : 0;
        }
    } else if (hsub_idx.size() == 1) {
        raise(errc::bad_design, "h_sub design needs at least two cells");
    }

    table.provenance = "synth(seed=" + std::to_string(seed) +
                       ",noise_scale=" + detail::format_double(noise_scale) +
                       ",rules=td/te linear + geometric intervals + logistic failure)";
    return table;
}

inline ExperimentTable filter_layout(const ExperimentTable& table, Layout layout) {
    ExperimentTable out;
    out.provenance = table.provenance;
    for (const auto& r : table.records)
        if (r.layout == layout) out.records.push_back(r);
    return out;
}

}  // namespace onsetml
