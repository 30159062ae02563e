#pragma once

#include <span>
#include <vector>

#include "sylrate/envelope.hpp"

namespace sylrate {

struct Peak {
    int frame_index = 0;
    double time_s = 0.0;
    double value = 0.0;
    double prominence = 0.0;
};

struct DetectionResult {
    std::vector<Peak> nuclei; // ascending time
    int count = 0;
    double speech_rate_sps = 0.0;
};

// Candidate peak indices: strict local maxima, plus the center index of any
// plateau (run of equal values strictly above both neighbors; left-of-center
// on even runs). Endpoints are never peaks.
std::vector<int> find_local_maxima(std::span<const double> envelope);

// Prominence of the peak at peak_index: the smaller of the drops to the
// minimum between this peak and the previous candidate (or sequence start)
// and to the minimum between this peak and the next candidate (or sequence
// end). peak_index must be a member of peak_indices.
double prominence(std::span<const double> envelope, int peak_index,
                  std::span<const int> peak_indices);

// Candidates on speech-masked frames whose prominence is >= threshold,
// ascending in time. speech_rate_sps = count / utterance_duration_s.
// Prominence is computed on the full envelope before masking.
DetectionResult detect_syllables(const SonorityEnvelope& envelope, const SpeechMask& mask,
                                 double threshold, double utterance_duration_s);

} // namespace sylrate
