#include "cid/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cid/math_util.hpp"

namespace cid {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delimiter)) cells.push_back(cell);
    if (!line.empty() && line.back() == delimiter) cells.emplace_back();
    return cells;
}

std::string trim_ws(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::int64_t row, const std::string& column) {
    const std::string s = trim_ws(raw);
    if (s.empty())
        throw std::runtime_error("load_csv: empty cell at data row " + std::to_string(row) +
                                 ", column '" + column + "'");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw std::runtime_error("load_csv: non-numeric cell '" + s + "' at data row " +
                                 std::to_string(row) + ", column '" + column + "'");
    return v;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Uniform integer in [0, n) from raw 64-bit draws, independent of any
// std::uniform_int_distribution implementation.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace

TabularDataset load_csv(const std::string& path, const std::string& target_column, char delimiter) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_line(line, delimiter);
    for (auto& h : header) h = trim_ws(h);
    std::int64_t target_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == target_column) target_col = static_cast<std::int64_t>(c);
    if (target_col < 0)
        throw std::runtime_error("load_csv: target column '" + target_column + "' not found in '" +
                                 path + "'");

    std::vector<std::vector<double>> rows;
    std::int64_t row_num = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim_ws(line).empty()) continue;
        ++row_num;
        auto cells = split_line(line, delimiter);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv: data row " + std::to_string(row_num) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        std::vector<double> parsed(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            parsed[c] = parse_cell(cells[c], row_num, header[c]);
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: '" + path + "' has no data rows");

    TabularDataset out;
    const std::int64_t m = static_cast<std::int64_t>(rows.size());
    const std::int64_t n = static_cast<std::int64_t>(header.size()) - 1;
    out.values.resize(m, n);
    out.target.resize(m);
    out.target_name = target_column;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (static_cast<std::int64_t>(c) != target_col) out.feature_names.push_back(header[c]);
    for (std::int64_t r = 0; r < m; ++r) {
        std::int64_t fc = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (static_cast<std::int64_t>(c) == target_col)
                out.target(r) = rows[r][c];
            else
                out.values(r, fc++) = rows[r][c];
        }
    }
    return out;
}

void save_csv(const TabularDataset& data, const std::string& path, char delimiter) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "' for writing");
    for (std::int64_t c = 0; c < data.num_features(); ++c)
        out << data.feature_names[static_cast<std::size_t>(c)] << delimiter;
    out << data.target_name << "\n";
    for (std::int64_t r = 0; r < data.rows(); ++r) {
        for (std::int64_t c = 0; c < data.num_features(); ++c)
            out << format_value(data.values(r, c)) << delimiter;
        out << format_value(data.target(r)) << "\n";
    }
    if (!out) throw std::runtime_error("save_csv: write failed for '" + path + "'");
}

TabularDataset quantile_gaussianize(const TabularDataset& data) {
    const std::int64_t m = data.rows();
    if (m < 2) throw std::invalid_argument("quantile_gaussianize: need at least 2 rows");

    TabularDataset out = data;
    out.bin_edges.clear();
    out.bin_midpoints.clear();
    out.bin_index.resize(0, 0);

    auto transform_column = [&](auto get, auto set, const std::string& name) {
        std::vector<double> col(static_cast<std::size_t>(m));
        for (std::int64_t r = 0; r < m; ++r) col[static_cast<std::size_t>(r)] = get(r);
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (*lo == *hi) {
            std::cerr << "warning: quantile_gaussianize: column '" << name
                      << "' is constant, passed through unchanged\n";
            return;
        }
        std::vector<int> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return col[static_cast<std::size_t>(a)] < col[static_cast<std::size_t>(b)]; });
        // Average rank over tie runs keeps ties tied and the map monotone.
        std::vector<double> rank(static_cast<std::size_t>(m));
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() &&
                   col[static_cast<std::size_t>(order[j + 1])] == col[static_cast<std::size_t>(order[i])])
                ++j;
            const double avg = 0.5 * (double(i) + double(j)) + 1.0;  // 1-based
            for (std::size_t k = i; k <= j; ++k) rank[static_cast<std::size_t>(order[k])] = avg;
            i = j + 1;
        }
        for (std::int64_t r = 0; r < m; ++r)
            set(r, normal_quantile((rank[static_cast<std::size_t>(r)] - 0.5) / double(m)));
    };

    for (std::int64_t c = 0; c < data.num_features(); ++c) {
        transform_column([&](std::int64_t r) { return data.values(r, c); },
                         [&](std::int64_t r, double v) { out.values(r, c) = v; },
                         data.feature_names[static_cast<std::size_t>(c)]);
    }
    transform_column([&](std::int64_t r) { return data.target(r); },
                     [&](std::int64_t r, double v) { out.target(r) = v; }, data.target_name);
    return out;
}

TrimResult trim_outliers(const TabularDataset& data, double k_sigma) {
    if (!(k_sigma > 0.0)) throw std::invalid_argument("trim_outliers: k_sigma must be positive");
    const std::int64_t n = data.num_features();
    std::vector<double> means(static_cast<std::size_t>(n) + 1), stds(static_cast<std::size_t>(n) + 1);
    std::vector<double> col(static_cast<std::size_t>(data.rows()));
    for (std::int64_t c = 0; c <= n; ++c) {
        for (std::int64_t r = 0; r < data.rows(); ++r)
            col[static_cast<std::size_t>(r)] = data.value_at(r, c);
        const MeanStd ms = mean_std(col);
        means[static_cast<std::size_t>(c)] = ms.mean;
        stds[static_cast<std::size_t>(c)] = ms.std;
    }
    return trim_outliers_with(data, means, stds, k_sigma);
}

TrimResult trim_outliers_with(const TabularDataset& data, const std::vector<double>& means,
                              const std::vector<double>& stds, double k_sigma) {
    if (!(k_sigma > 0.0)) throw std::invalid_argument("trim_outliers: k_sigma must be positive");
    const std::int64_t m = data.rows();
    const std::int64_t n = data.num_features();
    if (means.size() != static_cast<std::size_t>(n + 1) || stds.size() != means.size())
        throw std::invalid_argument("trim_outliers: statistics must cover features plus target");

    std::vector<std::int64_t> keep;
    keep.reserve(static_cast<std::size_t>(m));
    for (std::int64_t r = 0; r < m; ++r) {
        bool ok = true;
        for (std::int64_t c = 0; c <= n && ok; ++c) {
            const double s = stds[static_cast<std::size_t>(c)];
            if (s <= 0.0) continue;
            if (std::abs(data.value_at(r, c) - means[static_cast<std::size_t>(c)]) > k_sigma * s)
                ok = false;
        }
        if (ok) keep.push_back(r);
    }
    if (keep.empty()) throw std::runtime_error("trim_outliers: every row exceeded the threshold");

    TrimResult out;
    out.rows_removed = m - static_cast<std::int64_t>(keep.size());
    out.data.feature_names = data.feature_names;
    out.data.target_name = data.target_name;
    out.data.values.resize(static_cast<std::int64_t>(keep.size()), n);
    out.data.target.resize(static_cast<std::int64_t>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.data.values.row(static_cast<std::int64_t>(i)) = data.values.row(keep[i]);
        out.data.target(static_cast<std::int64_t>(i)) = data.target(keep[i]);
    }
    return out;
}

TabularDataset discretize(const TabularDataset& data, int bins) {
    if (bins < 2) throw std::invalid_argument("discretize: bins must be >= 2");
    const std::int64_t m = data.rows();
    const std::int64_t n_cols = data.num_columns();

    TabularDataset out = data;
    out.bin_edges.assign(static_cast<std::size_t>(n_cols), {});
    out.bin_midpoints.assign(static_cast<std::size_t>(n_cols), {});
    out.bin_index.setConstant(m, n_cols, -1);

    for (std::int64_t c = 0; c < n_cols; ++c) {
        double lo = data.value_at(0, c), hi = lo;
        std::vector<double> distinct;
        distinct.reserve(static_cast<std::size_t>(std::min<std::int64_t>(m, bins + 1)));
        for (std::int64_t r = 0; r < m; ++r) {
            const double v = data.value_at(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (distinct.size() <= static_cast<std::size_t>(bins) &&
                std::find(distinct.begin(), distinct.end(), v) == distinct.end())
                distinct.push_back(v);
        }
        if (distinct.size() < static_cast<std::size_t>(bins)) {
            const std::string name = c == data.num_features()
                                         ? data.target_name
                                         : data.feature_names[static_cast<std::size_t>(c)];
            std::cerr << "warning: discretize: column '" << name << "' has fewer than " << bins
                      << " distinct values\n";
        }
        if (lo == hi) {  // constant column: give it a unit-width span so edges stay increasing
            lo -= 0.5;
            hi += 0.5;
        }
        auto& edges = out.bin_edges[static_cast<std::size_t>(c)];
        auto& mids = out.bin_midpoints[static_cast<std::size_t>(c)];
        edges.resize(static_cast<std::size_t>(bins) + 1);
        mids.resize(static_cast<std::size_t>(bins));
        const double width = (hi - lo) / double(bins);
        for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = lo + width * b;
        edges.back() = hi;
        for (int b = 0; b < bins; ++b)
            mids[static_cast<std::size_t>(b)] =
                0.5 * (edges[static_cast<std::size_t>(b)] + edges[static_cast<std::size_t>(b) + 1]);
        for (std::int64_t r = 0; r < m; ++r) {
            const double v = data.value_at(r, c);
            int idx = static_cast<int>((v - lo) / width);
            idx = std::clamp(idx, 0, bins - 1);
            out.bin_index(r, c) = idx;
        }
    }
    return out;
}

SubsampleSet make_subsamples(std::int64_t n_rows, int n_subsets, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("make_subsamples: fraction must lie in (0, 1]");
    if (n_subsets < 2) throw std::invalid_argument("make_subsamples: need at least 2 subsets");
    const std::int64_t size = static_cast<std::int64_t>(fraction * double(n_rows));
    if (size < 2) throw std::invalid_argument("make_subsamples: fraction*n_rows must be >= 2");

    SubsampleSet out;
    out.seed = seed;
    out.subsets.resize(static_cast<std::size_t>(n_subsets));
    std::mt19937_64 rng(derive_seed(seed, 0x5ab5aULL));
    std::vector<int> pool(static_cast<std::size_t>(n_rows));
    for (auto& subset : out.subsets) {
        std::iota(pool.begin(), pool.end(), 0);
        // Partial Fisher-Yates: the first `size` slots are a uniform draw
        // without replacement.
        for (std::int64_t i = 0; i < size; ++i) {
            const auto j = i + static_cast<std::int64_t>(bounded_draw(rng, std::uint64_t(n_rows - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        subset.assign(pool.begin(), pool.begin() + size);
    }
    return out;
}

TabularDataset generate_toy(std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("generate_toy: n_samples must be >= 1");
    std::mt19937_64 rng(derive_seed(seed, 0x70f1ULL));
    std::gamma_distribution<double> gamma22(2.0, 2.0);
    std::gamma_distribution<double> gamma_half(0.5, 1.0);
    // Scale parameterization, matching the gamma convention above: X4 stays
    // within (-pi/2, 0] essentially always, so sin(X4) is a monotone copy.
    std::exponential_distribution<double> exp02(1.0 / 0.2);
    std::normal_distribution<double> norm_lo(-5.0, 1.0);
    std::normal_distribution<double> norm_hi(5.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    TabularDataset out;
    out.values.resize(n_samples, 6);
    out.target.resize(n_samples);
    out.feature_names = {"X1", "X2", "X3", "X4", "X5", "X6"};
    out.target_name = "y";

    for (std::int64_t r = 0; r < n_samples; ++r) {
        const double x1 = gamma22(rng);
        // Beta(0.5, 0.5) via the two-gamma construction.
        const double g1 = gamma_half(rng), g2 = gamma_half(rng);
        const double x2 = g1 / (g1 + g2);
        const double x3 = x1 * x2;
        const double x4 = -exp02(rng);
        const double x5 = std::sin(x4);
        const double x7 = unif(rng) < 0.7 ? 1.0 : 0.0;
        const double x8 = norm_lo(rng);
        const double x9 = norm_hi(rng);
        const double x6 = x7 * x8 + (1.0 - x7) * x9;
        const double u = unif(rng);

        double y;
        if (u <= 0.15)
            y = x1;
        else if (u <= 0.3)
            y = x2;
        else if (u <= 0.5)
            y = x3;
        else if (u <= 0.65)
            y = x1 + x2 + x3;
        else if (u <= 0.75)
            y = x4;
        else if (u <= 0.85)
            y = x5;
        else if (u < 0.95)
            y = x4 + x5;
        else
            y = x6;

        out.values(r, 0) = x1;
        out.values(r, 1) = x2;
        out.values(r, 2) = x3;
        out.values(r, 3) = x4;
        out.values(r, 4) = x5;
        out.values(r, 5) = x6;
        out.target(r) = y;
    }
    return out;
}

}  // namespace cid
