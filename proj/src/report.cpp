#include "cid/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cid/math_util.hpp"

namespace cid {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct BoxStats {
    double q1, q2, q3, lo, hi;
};

BoxStats box_stats(std::vector<double> values) {
    BoxStats b{};
    b.q1 = sample_quantile(values, 0.25);
    b.q2 = sample_quantile(values, 0.5);
    b.q3 = sample_quantile(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double fence_lo = b.q1 - 1.5 * iqr;
    const double fence_hi = b.q3 + 1.5 * iqr;
    b.lo = b.q2;
    b.hi = b.q2;
    bool first = true;
    for (double v : values) {
        if (v < fence_lo || v > fence_hi) continue;
        if (first) {
            b.lo = b.hi = v;
            first = false;
        } else {
            b.lo = std::min(b.lo, v);
            b.hi = std::max(b.hi, v);
        }
    }
    return b;
}

}  // namespace

void write_importances_csv(const std::vector<ImportanceEstimate>& estimates,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_importances_csv: cannot open '" + path + "'");
    out << "method,feature,subsample,value\n";
    for (const auto& est : estimates) {
        for (Eigen::Index f = 0; f < est.per_subsample.rows(); ++f)
            for (Eigen::Index s = 0; s < est.per_subsample.cols(); ++s)
                out << est.method << ',' << est.feature_names[static_cast<std::size_t>(f)] << ','
                    << s << ',' << fmt(est.per_subsample(f, s)) << '\n';
    }
    if (!out) throw std::runtime_error("write_importances_csv: write failed for '" + path + "'");
}

void write_summary_json(const std::vector<ImportanceEstimate>& estimates, const std::string& path) {
    nlohmann::json doc;
    for (const auto& est : estimates) {
        nlohmann::json entry;
        entry["features"] = est.feature_names;
        entry["median"] = std::vector<double>(est.median.begin(), est.median.end());
        entry["mean"] = std::vector<double>(est.mean.begin(), est.mean.end());
        entry["std"] = std::vector<double>(est.std.begin(), est.std.end());
        entry["ranking"] = est.ranking;
        nlohmann::json ranked_names = nlohmann::json::array();
        for (int f : est.ranking) ranked_names.push_back(est.feature_names[static_cast<std::size_t>(f)]);
        entry["ranking_names"] = ranked_names;
        doc[est.method] = entry;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary_json: cannot open '" + path + "'");
    out << doc.dump(2) << '\n';
}

void write_scores_csv(const SubsetCorrelationResult& scores,
                      const std::vector<MethodTiming>& timings, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_scores_csv: cannot open '" + path + "'");
    out << "method,subset_correlation,degenerate,avg_cycle_time_s\n";
    for (std::size_t i = 0; i < scores.methods.size(); ++i) {
        double seconds = 0.0;
        for (const auto& t : timings)
            if (t.method == scores.methods[i]) seconds = t.seconds_per_cycle;
        out << scores.methods[i] << ',' << fmt(scores.scores[i]) << ','
            << (scores.degenerate[i] ? 1 : 0) << ',' << fmt(seconds) << '\n';
    }
}

void write_boxplot_svg(const std::vector<ImportanceEstimate>& estimates, const std::string& path) {
    const int panel_w = 340, panel_h = 300;
    const int margin_l = 52, margin_r = 16, margin_t = 36, margin_b = 56;
    const int width = static_cast<int>(estimates.size()) * panel_w;
    const int height = panel_h;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < estimates.size(); ++p) {
        const auto& est = estimates[p];
        const int x0 = static_cast<int>(p) * panel_w + margin_l;
        const int y0 = margin_t;
        const int plot_w = panel_w - margin_l - margin_r;
        const int plot_h = panel_h - margin_t - margin_b;
        const Eigen::Index n = est.per_subsample.rows();

        std::vector<BoxStats> boxes;
        double vmin = 0.0, vmax = 0.0;
        bool first = true;
        for (Eigen::Index f = 0; f < n; ++f) {
            std::vector<double> row(est.per_subsample.row(f).begin(), est.per_subsample.row(f).end());
            boxes.push_back(box_stats(std::move(row)));
            const auto& b = boxes.back();
            if (first) {
                vmin = b.lo;
                vmax = b.hi;
                first = false;
            } else {
                vmin = std::min(vmin, b.lo);
                vmax = std::max(vmax, b.hi);
            }
        }
        if (!(vmax > vmin)) {
            vmax = vmin + 1.0;
            vmin -= 1.0;
        }
        const double pad = 0.06 * (vmax - vmin);
        vmin -= pad;
        vmax += pad;
        auto ypix = [&](double v) {
            return y0 + plot_h - (v - vmin) / (vmax - vmin) * plot_h;
        };

        svg << "<text x=\"" << x0 + plot_w / 2 << "\" y=\"" << y0 - 14
            << "\" text-anchor=\"middle\" font-size=\"14\">" << est.method << "</text>\n";
        svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\""
            << y0 + plot_h << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 + plot_h << "\" x2=\"" << x0 + plot_w
            << "\" y2=\"" << y0 + plot_h << "\" stroke=\"black\"/>\n";
        for (int tick = 0; tick <= 4; ++tick) {
            const double v = vmin + (vmax - vmin) * tick / 4.0;
            char label[24];
            std::snprintf(label, sizeof(label), "%.3g", v);
            svg << "<text x=\"" << x0 - 6 << "\" y=\"" << ypix(v) + 4
                << "\" text-anchor=\"end\" font-size=\"9\">" << label << "</text>\n";
        }
        if (vmin < 0.0 && vmax > 0.0)
            svg << "<line x1=\"" << x0 << "\" y1=\"" << ypix(0.0) << "\" x2=\"" << x0 + plot_w
                << "\" y2=\"" << ypix(0.0) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"3,3\"/>\n";

        const double slot = double(plot_w) / double(n);
        const double box_w = std::min(28.0, slot * 0.5);
        for (Eigen::Index pos = 0; pos < n; ++pos) {
            const int f = est.ranking[static_cast<std::size_t>(pos)];
            const auto& b = boxes[static_cast<std::size_t>(f)];
            const double cx = x0 + slot * (double(pos) + 0.5);
            svg << "<line x1=\"" << cx << "\" y1=\"" << ypix(b.lo) << "\" x2=\"" << cx
                << "\" y2=\"" << ypix(b.q1) << "\" stroke=\"black\"/>\n";
            svg << "<line x1=\"" << cx << "\" y1=\"" << ypix(b.q3) << "\" x2=\"" << cx
                << "\" y2=\"" << ypix(b.hi) << "\" stroke=\"black\"/>\n";
            svg << "<rect x=\"" << cx - box_w / 2 << "\" y=\"" << ypix(b.q3) << "\" width=\""
                << box_w << "\" height=\"" << std::max(1.0, ypix(b.q1) - ypix(b.q3))
                << "\" fill=\"#7fb2d9\" stroke=\"black\"/>\n";
            svg << "<line x1=\"" << cx - box_w / 2 << "\" y1=\"" << ypix(b.q2) << "\" x2=\""
                << cx + box_w / 2 << "\" y2=\"" << ypix(b.q2)
                << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
            svg << "<text x=\"" << cx << "\" y=\"" << y0 + plot_h + 14
                << "\" text-anchor=\"middle\" font-size=\"10\">"
                << est.feature_names[static_cast<std::size_t>(f)] << "</text>\n";
        }
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_boxplot_svg: cannot open '" + path + "'");
    out << svg.str();
}

}  // namespace cid
