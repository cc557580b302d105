// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/feature_judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/kernels.hpp"
#include "pruner/rng.hpp"

namespace pruner {

namespace {

std::vector<std::uint32_t> hashed_buckets(std::span<const std::string> tokens) {
    std::vector<std::uint32_t> buckets;
    buckets.reserve(tokens.size());
    for (const auto& t : tokens) buckets.push_back(static_cast<std::uint32_t>(fnv1a64(t) % kHashBuckets));
    std::sort(buckets.begin(), buckets.end());
    return buckets;
}

// Run-length view over a sorted bucket list: (bucket, count) pairs.
std::vector<std::pair<std::uint32_t, double>> bucket_counts(const std::vector<std::uint32_t>& sorted) {
    std::vector<std::pair<std::uint32_t, double>> out;
    for (auto b : sorted) {
        if (!out.empty() && out.back().first == b) out.back().second += 1.0;
        else out.emplace_back(b, 1.0);
    }
    return out;
}

double hashed_cosine(std::span<const std::string> left, std::span<const std::string> right) {
    const auto a = bucket_counts(hashed_buckets(left));
    const auto b = bucket_counts(hashed_buckets(right));
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [_, c] : a) na += c * c;
    for (const auto& [_, c] : b) nb += c * c;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) ++i;
        else if (b[j].first < a[i].first) ++j;
        else dot += a[i++].second * b[j++].second;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

std::set<Rational> numeric_literals(std::span<const std::string> tokens) {
    std::set<Rational> out;
    for (const auto& t : tokens) {
        // Keep sign, decimal point and fraction slash; drop wrapping punctuation.
        std::size_t begin = 0;
        std::size_t end = t.size();
        auto wrapping = [](char c) {
            return std::ispunct(static_cast<unsigned char>(c)) && c != '-' && c != '.' && c != '/' && c != '%';
        };
        while (begin < end && wrapping(t[begin])) ++begin;
        while (end > begin && (wrapping(t[end - 1]) || (t[end - 1] == '.' && end - begin > 1))) --end;
        if (begin == end) continue;
        if (auto v = parse_numeric(std::string_view(t).substr(begin, end - begin))) out.insert(*v);
    }
    return out;
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::set<std::string> marker_types(std::span<const std::string> tokens, const ReasoningLexicon& lexicon) {
    std::set<std::string> out;
    for (const auto& t : tokens) {
        if (lexicon.matches(t)) out.insert(normalize_marker(t));
    }
    return out;
}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

FeatureVector extract_features(std::span<const std::string> left, std::span<const std::string> right,
                               const ReasoningLexicon& lexicon) {
    if (left.empty() || right.empty()) throw Error(ErrorKind::InvalidArgument, "feature extraction needs non-empty segments");
    FeatureVector f;
    f.cosine_hashed_unigrams = hashed_cosine(left, right);
    f.jaccard_numeric_literals = jaccard(numeric_literals(left), numeric_literals(right));
    const double ll = static_cast<double>(left.size());
    const double lr = static_cast<double>(right.size());
    f.norm_length_diff = std::abs(ll - lr) / std::max(ll, lr);
    f.shared_reasoning_word_frac = jaccard(marker_types(left, lexicon), marker_types(right, lexicon));
    f.bias = 1.0;
    return f;
}

// ---------------------------------------------------------------------------
// Focal loss
// ---------------------------------------------------------------------------

void FocalLossParams::validate() const {
    if (!(gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "focal gamma must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "focal alpha must lie in (0,1)");
}

double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double focal_loss(double p_model, int label, const FocalLossParams& params) {
    const double p = std::clamp(p_model, kFocalEpsilon, 1.0 - kFocalEpsilon);
    const double p_t = label == 1 ? p : 1.0 - p;
    const double alpha_t = label == 1 ? params.alpha : 1.0 - params.alpha;
    return -alpha_t * std::pow(1.0 - p_t, params.gamma) * std::log(p_t);
}

double focal_loss_logit(double z, int label, const FocalLossParams& params) {
    const double s = label == 1 ? z : -z;  // p_t = sigmoid(s)
    const double alpha_t = label == 1 ? params.alpha : 1.0 - params.alpha;
    return alpha_t * std::pow(sigmoid(-s), params.gamma) * softplus(-s);
}

double focal_loss_logit_grad(double z, int label, const FocalLossParams& params) {
    // With p_t = sigmoid(s), s = +-z:
    //   dL/ds = alpha_t (1-p_t)^gamma [gamma p_t log p_t - (1-p_t)]
    const double s = label == 1 ? z : -z;
    const double alpha_t = label == 1 ? params.alpha : 1.0 - params.alpha;
    const double p_t = sigmoid(s);
    const double q_t = sigmoid(-s);
    const double log_p_t = -softplus(-s);
    const double ds = alpha_t * std::pow(q_t, params.gamma) * (params.gamma * p_t * log_p_t - q_t);
    return label == 1 ? ds : -ds;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::vector<LabeledFeatures> oversample(std::span<const LabeledFeatures> rows, std::size_t factor, std::uint64_t seed) {
    if (factor < 1) throw Error(ErrorKind::InvalidArgument, "oversample factor must be >= 1");
    std::size_t positives = 0;
    for (const auto& r : rows) positives += r.label == 1 ? 1 : 0;
    const std::size_t negatives = rows.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(ErrorKind::SingleClassDataset, "training pairs must contain both labels");
    }
    // Ties go to the different-answer class, the one the judge must not miss.
    const int minority = negatives <= positives ? 0 : 1;

    std::vector<LabeledFeatures> out(rows.begin(), rows.end());
    for (const auto& r : rows) {
        if (r.label != minority) continue;
        for (std::size_t extra = 1; extra < factor; ++extra) out.push_back(r);
    }
    Rng rng(seed);
    for (std::size_t i = out.size(); i > 1; --i) {
        std::swap(out[i - 1], out[rng.uniform_index(i)]);
    }
    return out;
}

std::array<double, kFeatureDim> fit_logistic_focal(std::span<const LabeledFeatures> rows, const TrainOptions& options) {
    options.focal.validate();
    if (options.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
    const std::size_t n = rows.size();

    // Column-major copy so each weight's contribution is one contiguous axpy.
    std::array<std::vector<double>, kFeatureDim> cols;
    for (auto& c : cols) c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < kFeatureDim; ++d) cols[d][i] = rows[i].x[d];
    }

    std::array<double, kFeatureDim> w{};
    std::vector<double> z(std::min(options.batch_size, n));
    std::vector<double> g(z.size());
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t start = 0; start < n; start += options.batch_size) {
            const std::size_t b = std::min(options.batch_size, n - start);
            std::span<double> zb(z.data(), b);
            std::span<double> gb(g.data(), b);
            std::fill(zb.begin(), zb.end(), 0.0);
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                kernels::axpy(w[d], std::span<const double>(cols[d]).subspan(start, b), zb);
            }
            const double inv_b = 1.0 / static_cast<double>(b);
            for (std::size_t i = 0; i < b; ++i) {
                gb[i] = focal_loss_logit_grad(zb[i], rows[start + i].label, options.focal) * inv_b;
            }
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                const double grad = kernels::dot(std::span<const double>(cols[d]).subspan(start, b), gb);
                w[d] -= options.learning_rate * grad;
            }
        }
    }
    return w;
}

FeatureJudge train_feature_judge(std::span<const TracePair> pairs, const ReasoningLexicon& lexicon,
                                 const TrainOptions& options) {
    std::vector<LabeledFeatures> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) {
        p.validate();
        rows.push_back({extract_features(p.left, p.right, lexicon).as_array(), p.label});
    }
    const auto balanced = oversample(rows, options.oversample_factor, options.seed);
    return FeatureJudge(fit_logistic_focal(balanced, options), lexicon, options.focal, options.seed);
}

// ---------------------------------------------------------------------------
// FeatureJudge
// ---------------------------------------------------------------------------

FeatureJudge::FeatureJudge(std::array<double, kFeatureDim> weights, ReasoningLexicon lexicon, FocalLossParams focal,
                           std::uint64_t seed)
    : weights_(weights), lexicon_(std::move(lexicon)), focal_(focal), seed_(seed) {}

double FeatureJudge::score_features(const FeatureVector& f) const noexcept {
    const auto x = f.as_array();
    double z = 0.0;
    for (std::size_t d = 0; d < kFeatureDim; ++d) z += weights_[d] * x[d];
    return sigmoid(z);
}

Verdict FeatureJudge::judge(const Segment& left, const Segment& right) const {
    return {JudgeScore(score_features(extract_features(left.tokens, right.tokens, lexicon_))),
            concat_length(left, right)};
}

nlohmann::json FeatureJudge::to_json() const {
    return nlohmann::json{{"weights", weights_},
                          {"feature_spec_version", kFeatureSpecVersion},
                          {"lexicon_hash", lexicon_.fingerprint()},
                          {"focal", {{"gamma", focal_.gamma}, {"alpha", focal_.alpha}}},
                          {"seed", seed_}};
}

FeatureJudge FeatureJudge::from_json(const nlohmann::json& j, ReasoningLexicon lexicon) {
    try {
        if (j.at("feature_spec_version").get<int>() != kFeatureSpecVersion) {
            throw Error(ErrorKind::SchemaError, "unsupported feature_spec_version");
        }
        if (j.at("lexicon_hash").get<std::uint64_t>() != lexicon.fingerprint()) {
            throw Error(ErrorKind::SchemaError, "judge was trained with a different reasoning lexicon");
        }
        const auto weights = j.at("weights").get<std::vector<double>>();
        if (weights.size() != kFeatureDim) throw Error(ErrorKind::SchemaError, "expected 5 weights");
        std::array<double, kFeatureDim> w{};
        std::copy(weights.begin(), weights.end(), w.begin());
        FocalLossParams focal{j.at("focal").at("gamma").get<double>(), j.at("focal").at("alpha").get<double>()};
        return FeatureJudge(w, std::move(lexicon), focal, j.at("seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaError, std::string("judge file: ") + e.what());
    }
}

void FeatureJudge::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

FeatureJudge FeatureJudge::load(const std::filesystem::path& path, ReasoningLexicon lexicon) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
    }
    return from_json(j, std::move(lexicon));
}

}  // namespace pruner
