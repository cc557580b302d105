// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "json.hpp"
#include "pruner/core.hpp"
#include "pruner/judge.hpp"
#include "pruner/truncation.hpp"

namespace pruner {

inline constexpr int kFeatureSpecVersion = 1;
inline constexpr std::size_t kFeatureDim = 5;
inline constexpr std::uint64_t kHashBuckets = 1u << 16;

struct FeatureVector {
    double cosine_hashed_unigrams = 0.0;
    double jaccard_numeric_literals = 0.0;
    double norm_length_diff = 0.0;
    double shared_reasoning_word_frac = 0.0;
    double bias = 1.0;

    std::array<double, kFeatureDim> as_array() const noexcept {
        return {cosine_hashed_unigrams, jaccard_numeric_literals, norm_length_diff, shared_reasoning_word_frac, bias};
    }
};

/// Unigrams go to bucket fnv1a64(token) mod 2^16. Numeric literals are tokens
/// (punctuation stripped) that parse as numbers, compared by value. Empty sets
/// on both sides give a Jaccard of 1.
FeatureVector extract_features(std::span<const std::string> left, std::span<const std::string> right,
                               const ReasoningLexicon& lexicon);

struct FocalLossParams {
    double gamma = 2.0;
    double alpha = 0.5;

    void validate() const;
};

inline constexpr double kFocalEpsilon = 1e-12;

/// -alpha_t (1 - p_t)^gamma log(p_t), with p clamped to [eps, 1 - eps].
double focal_loss(double p_model, int label, const FocalLossParams& params);

/// Loss and its derivative as functions of the logit z, p = sigmoid(z),
/// evaluated through log-sigmoid so large |z| stays finite.
double focal_loss_logit(double z, int label, const FocalLossParams& params);
double focal_loss_logit_grad(double z, int label, const FocalLossParams& params);

double sigmoid(double z) noexcept;

struct TrainOptions {
    FocalLossParams focal;
    std::size_t oversample_factor = 2;
    std::size_t epochs = 200;
    double learning_rate = 2.0;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
};

/// Logistic model over FeatureVector. Symmetric in its two inputs.
class FeatureJudge final : public Judge {
public:
    FeatureJudge(std::array<double, kFeatureDim> weights, ReasoningLexicon lexicon, FocalLossParams focal,
                 std::uint64_t seed);

    Verdict judge(const Segment& left, const Segment& right) const override;
    std::string_view name() const noexcept override { return "feature"; }

    double score_features(const FeatureVector& f) const noexcept;

    const std::array<double, kFeatureDim>& weights() const noexcept { return weights_; }
    const ReasoningLexicon& lexicon() const noexcept { return lexicon_; }
    const FocalLossParams& focal() const noexcept { return focal_; }
    std::uint64_t seed() const noexcept { return seed_; }

    nlohmann::json to_json() const;
    /// Rejects files whose feature spec version or lexicon fingerprint differ
    /// from what this build and the supplied lexicon would produce.
    static FeatureJudge from_json(const nlohmann::json& j, ReasoningLexicon lexicon);
    void save(const std::filesystem::path& path) const;
    static FeatureJudge load(const std::filesystem::path& path, ReasoningLexicon lexicon);

private:
    std::array<double, kFeatureDim> weights_;
    ReasoningLexicon lexicon_;
    FocalLossParams focal_;
    std::uint64_t seed_;
};

struct LabeledFeatures {
    std::array<double, kFeatureDim> x;
    int label;
};

/// Minority-class rows are duplicated (factor - 1) extra times; the result is
/// shuffled with the seed. Throws SingleClassDataset when a label is missing.
std::vector<LabeledFeatures> oversample(std::span<const LabeledFeatures> rows, std::size_t factor, std::uint64_t seed);

/// Mini-batch gradient descent on the mean focal loss. Deterministic in seed.
std::array<double, kFeatureDim> fit_logistic_focal(std::span<const LabeledFeatures> rows, const TrainOptions& options);

FeatureJudge train_feature_judge(std::span<const TracePair> pairs, const ReasoningLexicon& lexicon,
                                 const TrainOptions& options);

}  // namespace pruner
