#pragma once

#include <string>
#include <vector>

#include "cid/importance.hpp"

namespace cid {

/// Long-format CSV: method,feature,subsample,value.
void write_importances_csv(const std::vector<ImportanceEstimate>& estimates,
                           const std::string& path);

/// Per-method medians/means/stds and median-descending rankings.
void write_summary_json(const std::vector<ImportanceEstimate>& estimates, const std::string& path);

struct MethodTiming {
    std::string method;
    double seconds_per_cycle = 0.0;
};

/// method,subset_correlation,degenerate,avg_cycle_time_s rows.
void write_scores_csv(const SubsetCorrelationResult& scores,
                      const std::vector<MethodTiming>& timings, const std::string& path);

/// One box-and-whisker panel per method, features ordered by median
/// importance; whiskers reach the farthest points within 1.5 IQR.
void write_boxplot_svg(const std::vector<ImportanceEstimate>& estimates, const std::string& path);

}  // namespace cid
