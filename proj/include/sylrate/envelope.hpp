#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sylrate/audio_io.hpp"

namespace sylrate {

inline constexpr int kNumBands = 7;

struct PipelineConfig {
    double window_s = 0.020;
    double hop_s = 0.010;
    double energy_threshold_db = -30.0;
    double smoothing_cutoff_hz = 7.0;
    std::array<double, kNumBands + 1> band_edges_hz{60.0,   370.0,  800.0,  1400.0,
                                                    2250.0, 3450.0, 5130.0, 7500.0};
    double transition_width_hz = 50.0;
    double log_floor = 1e-6;

    // Throws ValidationError if the edges are not strictly ascending,
    // hop/window are inconsistent, or the smoothing cutoff is not below the
    // frame-rate Nyquist.
    void validate() const;
};

// Per-band weights of the sonority sum.
struct WeightVector {
    std::array<double, kNumBands> w{};
};

// Per-frame, per-band normalized log energies (natural log). Every value is
// >= ln(log_floor).
struct BandEnergyMatrix {
    std::vector<std::array<double, kNumBands>> values;
    double frame_rate_hz = 0.0;

    std::size_t frames() const { return values.size(); }
};

struct SonorityEnvelope {
    std::vector<double> values;
    double frame_rate_hz = 0.0;
};

// Per-frame speech/non-speech flags (1 = speech).
struct SpeechMask {
    std::vector<std::uint8_t> flags;
};

// Hamming-windowed short-time frames.
struct FramedSignal {
    std::vector<std::vector<double>> frames;
    int window_len = 0;
    int hop_len = 0;
    int sample_rate = 0;

    double frame_rate_hz() const {
        return hop_len > 0 ? static_cast<double>(sample_rate) / hop_len : 0.0;
    }
};

// Cuts the clip into round(window_s * fs)-sample frames at round(hop_s * fs)
// hop and applies a symmetric Hamming window. Frame count is
// floor((N - W) / H) + 1. Throws ValidationError if the clip is shorter than
// one window.
FramedSignal frame_signal(const AudioClip& clip, const PipelineConfig& config);

// Raw (pre-normalization) trapezoid-weighted band energies per frame. The
// magnitude-squared spectrum comes from a DFT zero-padded to the next power
// of two >= window length; each band's trapezoid is flat inside the band
// with linear transitions of transition_width_hz straddling each edge, so
// adjacent bands sum to 1 in the overlap. Bands above Nyquist get zero.
std::vector<std::array<double, kNumBands>> band_energies(const FramedSignal& frames,
                                                         const PipelineConfig& config);

// Divides each band by its own per-utterance maximum (bands with zero max are
// left as-is), clamps below at log_floor, takes the natural log.
BandEnergyMatrix normalize_and_log(const std::vector<std::array<double, kNumBands>>& raw,
                                   const PipelineConfig& config, double frame_rate_hz);

// Flags a frame as speech iff its short-time energy is within
// energy_threshold_db of the utterance maximum (boundary inclusive). An
// all-zero utterance has no speech frames.
SpeechMask speech_mask(const FramedSignal& frames, const PipelineConfig& config);

// E[n] = sum_i w_i * e_i[n].
SonorityEnvelope weighted_envelope(const BandEnergyMatrix& matrix, const WeightVector& weights);

// Zero-phase low pass: second-order Butterworth at smoothing_cutoff_hz run
// forward-backward (odd-reflection padding, steady-state initial conditions),
// averaged with the time-reversed run so that even-symmetric inputs produce
// exactly even-symmetric outputs. DC gain 1; length preserved; length-1
// input returned unchanged.
SonorityEnvelope smooth(const SonorityEnvelope& envelope, const PipelineConfig& config);

struct EnvelopeResult {
    SonorityEnvelope envelope;
    SpeechMask mask;
};

// Full chain: frame -> band energies -> normalize/log -> weighted sum ->
// smooth, plus the speech mask from the same frames.
EnvelopeResult compute_envelope(const AudioClip& clip, const WeightVector& weights,
                                const PipelineConfig& config);

} // namespace sylrate
