#include "placemove/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace placemove {

double cosine_sim(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine_sim: undefined for zero vector");
    return a.dot(b) / (na * nb);
}

double embedding_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                          const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    return 1.0 - cosine_sim(a, b);
}

namespace {

// unit-normalized rows of the eval subset; caller guarantees nonzero rows
Matrix normalized_subset(const Matrix& vectors, const std::vector<PlaceId>& eval_set) {
    Matrix out(eval_set.size(), vectors.cols());
    for (size_t i = 0; i < eval_set.size(); ++i) {
        double n = vectors.row(eval_set[i]).norm();
        if (n == 0.0)
            throw std::invalid_argument("eval: zero vector in eval set (id " +
                                        std::to_string(eval_set[i]) + ")");
        out.row(i) = vectors.row(eval_set[i]) / n;
    }
    return out;
}

}  // namespace

MatchResult match_rate(const Matrix& vectors, const std::vector<PlaceId>& eval_set,
                       const std::vector<uint32_t>& categories) {
    if (eval_set.size() < 2) throw std::invalid_argument("match_rate: need at least 2 places");
    Matrix V = normalized_subset(vectors, eval_set);

    MatchResult res;
    res.n_evaluated = eval_set.size();
    res.nearest.resize(eval_set.size());
    for (size_t i = 0; i < eval_set.size(); ++i) {
        Eigen::VectorXd sims = V * V.row(i).transpose();
        double best = -std::numeric_limits<double>::infinity();
        size_t best_j = i;
        for (size_t j = 0; j < eval_set.size(); ++j) {
            if (j == i) continue;
            double s = sims(j);
            if (s > best || (s == best && eval_set[j] < eval_set[best_j])) {
                best = s;
                best_j = j;
            }
        }
        res.nearest[i] = eval_set[best_j];
        if (categories[eval_set[best_j]] == categories[eval_set[i]]) ++res.matched;
    }
    res.match_rate = static_cast<double>(res.matched) / static_cast<double>(res.n_evaluated);
    return res;
}

SilhouetteResult silhouette(const Matrix& vectors, const std::vector<PlaceId>& eval_set,
                            const std::vector<uint32_t>& categories) {
    if (eval_set.size() < 2) throw std::invalid_argument("silhouette: need at least 2 places");
    uint32_t n_cat = 0;
    for (PlaceId id : eval_set) n_cat = std::max(n_cat, categories[id] + 1);

    std::vector<uint64_t> cluster_size(n_cat, 0);
    for (PlaceId id : eval_set) ++cluster_size[categories[id]];
    uint32_t present = 0;
    for (auto s : cluster_size)
        if (s > 0) ++present;
    if (present < 2) throw std::invalid_argument("silhouette: need at least 2 categories");

    Matrix V = normalized_subset(vectors, eval_set);

    SilhouetteResult res;
    res.n_evaluated = eval_set.size();
    res.per_category.assign(n_cat, std::numeric_limits<double>::quiet_NaN());
    res.category_sizes = cluster_size;

    std::vector<double> cat_sum(n_cat, 0.0);
    double total = 0.0;
    for (size_t i = 0; i < eval_set.size(); ++i) {
        uint32_t ci = categories[eval_set[i]];
        double s_i = 0.0;
        if (cluster_size[ci] > 1) {
            // mean cosine distance to each cluster
            std::vector<double> dist_sum(n_cat, 0.0);
            Eigen::VectorXd sims = V * V.row(i).transpose();
            for (size_t j = 0; j < eval_set.size(); ++j) {
                if (j == i) continue;
                dist_sum[categories[eval_set[j]]] += 1.0 - sims(j);
            }
            double a = dist_sum[ci] / static_cast<double>(cluster_size[ci] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (uint32_t c = 0; c < n_cat; ++c) {
                if (c == ci || cluster_size[c] == 0) continue;
                b = std::min(b, dist_sum[c] / static_cast<double>(cluster_size[c]));
            }
            double denom = std::max(a, b);
            s_i = denom > 0.0 ? (b - a) / denom : 0.0;
        }
        cat_sum[ci] += s_i;
        total += s_i;
    }
    for (uint32_t c = 0; c < n_cat; ++c)
        if (cluster_size[c] > 0)
            res.per_category[c] = cat_sum[c] / static_cast<double>(cluster_size[c]);
    res.mean = total / static_cast<double>(eval_set.size());
    return res;
}

PowerLawFit power_law_fit_from_frequencies(std::vector<uint64_t> frequencies) {
    std::erase(frequencies, 0);
    if (frequencies.size() < 3)
        throw std::invalid_argument("power_law_fit: need at least 3 distinct places");
    std::sort(frequencies.begin(), frequencies.end(), std::greater<>());

    const size_t n = frequencies.size();
    PowerLawFit fit;
    fit.n_points = n;

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t r = 0; r < n; ++r) {
        double x = std::log(static_cast<double>(r + 1));
        double y = std::log(static_cast<double>(frequencies[r]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double dn = static_cast<double>(n);
    double sxx_c = sxx - sx * sx / dn;
    double syy_c = syy - sy * sy / dn;
    double sxy_c = sxy - sx * sy / dn;

    fit.slope = sxy_c / sxx_c;
    fit.intercept = (sy - fit.slope * sx) / dn;
    if (syy_c <= 0.0) {
        fit.degenerate = true;
        fit.slope = 0.0;
        fit.r_squared = 0.0;
    } else {
        fit.r_squared = (sxy_c * sxy_c) / (sxx_c * syy_c);
    }
    return fit;
}

PowerLawFit power_law_fit(const std::vector<Trip>& trips) {
    std::map<PlaceId, uint64_t> freq;
    for (const auto& t : trips) ++freq[t.origin];
    std::vector<uint64_t> f;
    f.reserve(freq.size());
    for (const auto& [_, n] : freq) f.push_back(n);
    return power_law_fit_from_frequencies(std::move(f));
}

void write_rank_frequency_csv(const std::string& path, const std::vector<Trip>& trips) {
    std::map<PlaceId, uint64_t> freq;
    for (const auto& t : trips) ++freq[t.origin];
    std::vector<uint64_t> f;
    for (const auto& [_, n] : freq) f.push_back(n);
    std::sort(f.begin(), f.end(), std::greater<>());

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write rank-frequency file: " + path);
    out << "rank,frequency\n";
    for (size_t r = 0; r < f.size(); ++r) out << (r + 1) << ',' << f[r] << '\n';
}

std::string report_to_text(const EvalReport& r, const CategoryTable& categories) {
    std::ostringstream os;
    os << "match_rate=" << r.match.match_rate << '\n';
    os << "matched=" << r.match.matched << '\n';
    os << "n_evaluated=" << r.match.n_evaluated << '\n';
    os << "silhouette_mean=" << r.silhouette.mean << '\n';
    for (size_t c = 0; c < r.silhouette.per_category.size(); ++c) {
        if (r.silhouette.category_sizes[c] == 0) continue;
        const std::string& name = c < categories.names.size() ? categories.names[c]
                                                              : std::to_string(c);
        os << "silhouette." << name << '=' << r.silhouette.per_category[c] << '\n';
    }
    os << "zero_vectors_excluded=" << r.zero_vectors_excluded << '\n';
    return os.str();
}

std::string report_to_json(const EvalReport& r, const CategoryTable& categories) {
    nlohmann::json j;
    j["match_rate"] = r.match.match_rate;
    j["matched"] = r.match.matched;
    j["n_evaluated"] = r.match.n_evaluated;
    j["silhouette_mean"] = r.silhouette.mean;
    nlohmann::json per_cat = nlohmann::json::object();
    for (size_t c = 0; c < r.silhouette.per_category.size(); ++c) {
        if (r.silhouette.category_sizes[c] == 0) continue;
        const std::string& name = c < categories.names.size() ? categories.names[c]
                                                              : std::to_string(c);
        per_cat[name] = r.silhouette.per_category[c];
    }
    j["silhouette_per_category"] = per_cat;
    j["zero_vectors_excluded"] = r.zero_vectors_excluded;
    return j.dump(2);
}

}  // namespace placemove
