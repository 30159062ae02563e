#include <memory>
#include <vector>

#include "sylrate/errors.hpp"
#include "sylrate/metrics.hpp"
#include "sylrate/parallel.hpp"
#include "sylrate/peaks.hpp"
#include "sylrate/pso.hpp"

namespace sylrate {

namespace {

// Everything about an utterance that does not depend on the search position.
struct CachedUtterance {
    BandEnergyMatrix matrix;
    SpeechMask mask;
    double duration_s = 0.0;
    std::vector<VowelSegment> segments;
    int actual_count = 0;
};

struct UtteranceCost {
    MatchResult match;
    int predicted = 0;
};

} // namespace

SearchSpace default_search_space() {
    SearchSpace space;
    space.lower.assign(kNumBands, -2.0);
    space.upper.assign(kNumBands, 5.0);
    space.lower.push_back(0.01);
    space.upper.push_back(10.0);
    return space;
}

CostFn make_pipeline_cost(const Corpus& corpus, CostKind cost_kind,
                          const PipelineConfig& pipeline_config, int n_threads) {
    if (corpus.utterances.empty())
        throw ValidationError("make_pipeline_cost: corpus must be non-empty");
    pipeline_config.validate();

    // band energies, masks, and ground truth never depend on the position;
    // compute them once and share across all evaluations
    auto cache = std::make_shared<std::vector<CachedUtterance>>(corpus.utterances.size());
    parallel_for(corpus.utterances.size(), n_threads, [&](std::size_t u) {
        const UtteranceRecord& rec = corpus.utterances[u];
        const FramedSignal frames = frame_signal(rec.audio, pipeline_config);
        auto& slot = (*cache)[u];
        slot.matrix = normalize_and_log(band_energies(frames, pipeline_config), pipeline_config,
                                        frames.frame_rate_hz());
        slot.mask = speech_mask(frames, pipeline_config);
        slot.duration_s = rec.audio.duration_s();
        slot.segments = rec.vowel_segments;
        slot.actual_count = rec.syllable_count;
    });

    return [cache, cost_kind, pipeline_config, n_threads](const std::vector<double>& position) {
        if (position.size() != kNumBands + 1)
            throw ValidationError("pipeline cost: position must have 8 dimensions");
        WeightVector w;
        for (int b = 0; b < kNumBands; ++b)
            w.w[static_cast<std::size_t>(b)] = position[static_cast<std::size_t>(b)];
        const double threshold = position[kNumBands];

        std::vector<UtteranceCost> per_utt(cache->size());
        parallel_for(cache->size(), n_threads, [&](std::size_t u) {
            const CachedUtterance& c = (*cache)[u];
            const SonorityEnvelope env = smooth(weighted_envelope(c.matrix, w), pipeline_config);
            const DetectionResult det = detect_syllables(env, c.mask, threshold, c.duration_s);
            std::vector<double> times;
            times.reserve(det.nuclei.size());
            for (const Peak& p : det.nuclei) times.push_back(p.time_s);
            per_utt[u].match = match_detections(times, c.segments);
            per_utt[u].predicted = det.count;
        });

        // reduce in utterance order: thread-count independent
        if (cost_kind == CostKind::inv_f) {
            MatchResult pooled;
            for (const auto& uc : per_utt) pooled += uc.match;
            return cost_inv_f(pooled);
        }
        std::vector<int> predicted, actual;
        predicted.reserve(per_utt.size());
        actual.reserve(per_utt.size());
        for (std::size_t u = 0; u < per_utt.size(); ++u) {
            predicted.push_back(per_utt[u].predicted);
            actual.push_back((*cache)[u].actual_count);
        }
        return cost_mae(predicted, actual);
    };
}

TrainResult train_pipeline(const Corpus& corpus, CostKind cost_kind,
                           const PipelineConfig& pipeline_config, const PsoConfig& pso_config,
                           const SearchSpace& space, int n_threads) {
    if (space.dimensions() != kNumBands + 1)
        throw ValidationError("train_pipeline: search space must have 8 dimensions");
    const CostFn cost_fn = make_pipeline_cost(corpus, cost_kind, pipeline_config, n_threads);

    TrainResult result;
    result.swarm = optimize(cost_fn, space, pso_config);
    for (int b = 0; b < kNumBands; ++b)
        result.params.weights.w[static_cast<std::size_t>(b)] =
            result.swarm.best_position[static_cast<std::size_t>(b)];
    result.params.prominence_threshold = result.swarm.best_position[kNumBands];
    return result;
}

} // namespace sylrate
