#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sylrate/audio_io.hpp"

namespace sylrate {

// Sentinel cost for degenerate precision/recall (no correct detections).
inline constexpr double kDegenerateCost = 1e6;

struct MatchResult {
    int true_positives = 0;
    int false_positives = 0;
    int false_negatives = 0;

    MatchResult& operator+=(const MatchResult& other) {
        true_positives += other.true_positives;
        false_positives += other.false_positives;
        false_negatives += other.false_negatives;
        return *this;
    }
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

// Greedy one-to-one matching. Segments are processed in time order (sorted
// internally); each segment claims the unclaimed detection inside it nearest
// to the segment midpoint. Detections inside no segment or left unclaimed are
// false positives; unclaimed segments are false negatives. detection_times
// must be ascending.
MatchResult match_detections(const std::vector<double>& detection_times,
                             std::vector<VowelSegment> segments);

// P = TP/(TP+FP), R = TP/(TP+FN), F = 2PR/(P+R); each 0 when its denominator
// is 0. Corpus-level values pool raw counts before dividing.
Prf precision_recall_f(const MatchResult& pooled);

// (P + R) / (2 P R) when P*R > 0, else kDegenerateCost.
double cost_inv_f(const MatchResult& pooled);

// Mean absolute per-utterance count error. Throws ValidationError on empty
// input or length mismatch.
double cost_mae(const std::vector<int>& predicted, const std::vector<int>& actual);

// 100 * mean(|pred - actual| / actual), percent. Throws ValidationError
// naming the utterance index whose actual count is 0.
double sr_error_rate(const std::vector<int>& predicted, const std::vector<int>& actual);

// Sample Pearson correlation. Throws ValidationError when fewer than two
// utterances or either vector is constant (correlation undefined).
double pearson_count_corr(const std::vector<int>& predicted, const std::vector<int>& actual);

struct UtteranceEvalRow {
    std::string id;
    int predicted = 0;
    int actual = 0;
    MatchResult match;
    double speech_rate_sps = 0.0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    double mae_count = 0.0;
    double sr_error_rate_pct = 0.0;
    // Absent when undefined (fewer than two utterances or constant counts).
    std::optional<double> pearson_count_corr;
    std::vector<UtteranceEvalRow> per_utterance;
};

// Aggregates per-utterance rows into corpus-level metrics: pooled P/R/F, MAE,
// SR error rate, Pearson correlation (nullopt when undefined). Throws
// ValidationError on empty rows or a zero actual count (names the id).
EvalReport build_eval_report(std::vector<UtteranceEvalRow> rows);

} // namespace sylrate
