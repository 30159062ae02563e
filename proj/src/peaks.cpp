#include "sylrate/peaks.hpp"

#include <algorithm>

#include "sylrate/errors.hpp"

namespace sylrate {

std::vector<int> find_local_maxima(std::span<const double> envelope) {
    std::vector<int> candidates;
    const std::size_t n = envelope.size();
    if (n < 3) return candidates;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (envelope[i] <= envelope[i - 1]) {
            ++i;
            continue;
        }
        // run of equal values starting at i, strictly above the left neighbor
        std::size_t j = i;
        while (j + 1 < n && envelope[j + 1] == envelope[i]) ++j;
        if (j + 1 < n && envelope[j + 1] < envelope[i]) {
            candidates.push_back(static_cast<int>((i + j) / 2)); // plateau center
        }
        i = j + 1;
    }
    return candidates;
}

double prominence(std::span<const double> envelope, int peak_index,
                  std::span<const int> peak_indices) {
    const auto it = std::find(peak_indices.begin(), peak_indices.end(), peak_index);
    if (it == peak_indices.end())
        throw ValidationError("prominence: peak_index is not a candidate peak");
    const int prev = it == peak_indices.begin() ? -1 : *(it - 1);
    const int next =
        it + 1 == peak_indices.end() ? static_cast<int>(envelope.size()) : *(it + 1);

    double left = envelope[static_cast<std::size_t>(peak_index)];
    for (int k = prev + 1; k < peak_index; ++k)
        left = std::min(left, envelope[static_cast<std::size_t>(k)]);
    double right = envelope[static_cast<std::size_t>(peak_index)];
    for (int k = peak_index + 1; k < next; ++k)
        right = std::min(right, envelope[static_cast<std::size_t>(k)]);

    return envelope[static_cast<std::size_t>(peak_index)] - std::max(left, right);
}

DetectionResult detect_syllables(const SonorityEnvelope& envelope, const SpeechMask& mask,
                                 double threshold, double utterance_duration_s) {
    if (envelope.values.size() != mask.flags.size())
        throw ValidationError("detect_syllables: envelope and mask lengths differ");
    if (!(threshold > 0.0))
        throw ValidationError("detect_syllables: threshold must be positive");

    const std::vector<int> candidates = find_local_maxima(envelope.values);
    DetectionResult result;
    for (const int idx : candidates) {
        if (!mask.flags[static_cast<std::size_t>(idx)]) continue;
        const double prom = prominence(envelope.values, idx, candidates);
        if (prom < threshold) continue;
        Peak p;
        p.frame_index = idx;
        p.time_s = envelope.frame_rate_hz > 0.0 ? idx / envelope.frame_rate_hz : 0.0;
        p.value = envelope.values[static_cast<std::size_t>(idx)];
        p.prominence = prom;
        result.nuclei.push_back(p);
    }
    result.count = static_cast<int>(result.nuclei.size());
    result.speech_rate_sps =
        utterance_duration_s > 0.0 ? result.count / utterance_duration_s : 0.0;
    return result;
}

} // namespace sylrate
