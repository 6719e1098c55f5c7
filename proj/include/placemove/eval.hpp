#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "placemove/ingest.hpp"
#include "placemove/trainer.hpp"

namespace placemove {

double cosine_sim(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b);

// 1 - cosine similarity, in [0, 2]
double embedding_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                          const Eigen::Ref<const Eigen::RowVectorXd>& b);

struct MatchResult {
    double match_rate = 0.0;
    uint64_t matched = 0;
    uint64_t n_evaluated = 0;
    std::vector<PlaceId> nearest;  // per eval_set entry, its nearest neighbor
};

struct SilhouetteResult {
    double mean = 0.0;
    std::vector<double> per_category;   // indexed by category id; NaN if absent
    std::vector<uint64_t> category_sizes;
    uint64_t n_evaluated = 0;
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;  // zero-variance frequencies; r_squared reported as 0
    std::string note = "p-value not computed";
    size_t n_points = 0;
};

struct EvalReport {
    MatchResult match;
    SilhouetteResult silhouette;
    uint64_t zero_vectors_excluded = 0;
};

// Leave-one-out nearest neighbor by cosine similarity over eval_set (ties by
// smallest id); match iff the neighbor shares the place's category.
MatchResult match_rate(const Matrix& vectors, const std::vector<PlaceId>& eval_set,
                       const std::vector<uint32_t>& categories);

// Mean silhouette over eval_set using cosine distance; singleton clusters
// score 0.
SilhouetteResult silhouette(const Matrix& vectors, const std::vector<PlaceId>& eval_set,
                            const std::vector<uint32_t>& categories);

// OLS of log(frequency) on log(rank) over trip-origin frequencies.
PowerLawFit power_law_fit(const std::vector<Trip>& trips);
PowerLawFit power_law_fit_from_frequencies(std::vector<uint64_t> frequencies);

// rank,frequency CSV for external plotting
void write_rank_frequency_csv(const std::string& path, const std::vector<Trip>& trips);

std::string report_to_text(const EvalReport& r, const CategoryTable& categories);
std::string report_to_json(const EvalReport& r, const CategoryTable& categories);

}  // namespace placemove
