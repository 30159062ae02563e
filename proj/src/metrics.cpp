#include "sylrate/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sylrate/errors.hpp"

namespace sylrate {

MatchResult match_detections(const std::vector<double>& detection_times,
                             std::vector<VowelSegment> segments) {
    std::stable_sort(segments.begin(), segments.end(),
                     [](const VowelSegment& a, const VowelSegment& b) {
                         return a.start_s < b.start_s;
                     });
    std::vector<char> claimed(detection_times.size(), 0);
    int matched = 0;
    for (const auto& seg : segments) {
        const double mid = 0.5 * (seg.start_s + seg.end_s);
        int best = -1;
        double best_dist = 0.0;
        for (std::size_t d = 0; d < detection_times.size(); ++d) {
            if (claimed[d]) continue;
            const double t = detection_times[d];
            if (t < seg.start_s || t > seg.end_s) continue;
            const double dist = std::abs(t - mid);
            if (best < 0 || dist < best_dist) { // ties keep the earlier detection
                best = static_cast<int>(d);
                best_dist = dist;
            }
        }
        if (best >= 0) {
            claimed[static_cast<std::size_t>(best)] = 1;
            ++matched;
        }
    }
    MatchResult r;
    r.true_positives = matched;
    r.false_positives = static_cast<int>(detection_times.size()) - matched;
    r.false_negatives = static_cast<int>(segments.size()) - matched;
    return r;
}

Prf precision_recall_f(const MatchResult& pooled) {
    Prf out;
    const int detections = pooled.true_positives + pooled.false_positives;
    const int actual = pooled.true_positives + pooled.false_negatives;
    out.precision = detections > 0 ? static_cast<double>(pooled.true_positives) / detections : 0.0;
    out.recall = actual > 0 ? static_cast<double>(pooled.true_positives) / actual : 0.0;
    const double pr = out.precision + out.recall;
    out.f_score = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
    return out;
}

double cost_inv_f(const MatchResult& pooled) {
    const Prf prf = precision_recall_f(pooled);
    if (prf.precision * prf.recall > 0.0)
        return (prf.precision + prf.recall) / (2.0 * prf.precision * prf.recall);
    return kDegenerateCost;
}

double cost_mae(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.empty()) throw ValidationError("cost_mae: needs at least one utterance");
    if (predicted.size() != actual.size())
        throw ValidationError("cost_mae: predicted/actual length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        sum += std::abs(predicted[i] - actual[i]);
    return sum / static_cast<double>(predicted.size());
}

double sr_error_rate(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.empty()) throw ValidationError("sr_error_rate: needs at least one utterance");
    if (predicted.size() != actual.size())
        throw ValidationError("sr_error_rate: predicted/actual length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (actual[i] <= 0)
            throw ValidationError("sr_error_rate: utterance " + std::to_string(i) +
                                  " has zero actual syllable count");
        sum += std::abs(predicted[i] - actual[i]) / static_cast<double>(actual[i]);
    }
    return 100.0 * sum / static_cast<double>(predicted.size());
}

double pearson_count_corr(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size())
        throw ValidationError("pearson_count_corr: predicted/actual length mismatch");
    const std::size_t n = predicted.size();
    if (n < 2) throw ValidationError("pearson_count_corr: needs at least two utterances");
    double mean_p = 0.0, mean_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_p += predicted[i];
        mean_a += actual[i];
    }
    mean_p /= static_cast<double>(n);
    mean_a /= static_cast<double>(n);
    double spp = 0.0, saa = 0.0, spa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = predicted[i] - mean_p;
        const double da = actual[i] - mean_a;
        spp += dp * dp;
        saa += da * da;
        spa += dp * da;
    }
    if (spp == 0.0 || saa == 0.0)
        throw ValidationError("pearson_count_corr: undefined for a constant count vector");
    return spa / std::sqrt(spp * saa);
}

EvalReport build_eval_report(std::vector<UtteranceEvalRow> rows) {
    if (rows.empty()) throw ValidationError("build_eval_report: no utterances");
    MatchResult pooled;
    std::vector<int> predicted, actual;
    predicted.reserve(rows.size());
    actual.reserve(rows.size());
    for (const auto& row : rows) {
        pooled += row.match;
        predicted.push_back(row.predicted);
        if (row.actual <= 0)
            throw ValidationError("build_eval_report: utterance \"" + row.id +
                                  "\" has zero actual syllable count");
        actual.push_back(row.actual);
    }
    EvalReport report;
    const Prf prf = precision_recall_f(pooled);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f_score = prf.f_score;
    report.mae_count = cost_mae(predicted, actual);
    report.sr_error_rate_pct = sr_error_rate(predicted, actual);
    try {
        report.pearson_count_corr = pearson_count_corr(predicted, actual);
    } catch (const ValidationError&) {
        report.pearson_count_corr = std::nullopt;
    }
    report.per_utterance = std::move(rows);
    return report;
}

} // namespace sylrate
