#include "sylrate/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "sylrate/errors.hpp"

namespace sylrate {

namespace {

constexpr double kPi = std::numbers::pi;

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Trapezoid weight of band [lo, hi] at frequency f, with linear transitions
// of width `transition` straddling both edges.
double trapezoid(double f, double lo, double hi, double transition) {
    const double half = 0.5 * transition;
    if (f <= lo - half || f >= hi + half) return 0.0;
    if (f < lo + half) return (f - (lo - half)) / transition;
    if (f <= hi - half) return 1.0;
    return ((hi + half) - f) / transition;
}

struct Biquad {
    double b0, b1, b2, a1, a2; // a0 normalized to 1
    double zi1, zi2;           // steady-state unit-step initial state
};

// Bilinear-transform second-order Butterworth low pass.
Biquad design_butter2_lowpass(double cutoff_hz, double fs_hz) {
    const double k = std::tan(kPi * cutoff_hz / fs_hz);
    const double k2 = k * k;
    const double sqrt2 = std::numbers::sqrt2;
    const double a0 = 1.0 + sqrt2 * k + k2;
    Biquad q;
    q.b0 = k2 / a0;
    q.b1 = 2.0 * k2 / a0;
    q.b2 = k2 / a0;
    q.a1 = 2.0 * (k2 - 1.0) / a0;
    q.a2 = (1.0 - sqrt2 * k + k2) / a0;
    const double y_ss = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    q.zi2 = q.b2 - q.a2 * y_ss;
    q.zi1 = q.b1 - q.a1 * y_ss + q.zi2;
    return q;
}

// Direct form II transposed, state seeded with zi * x[0].
void filter_in_place(const Biquad& q, std::vector<double>& x) {
    if (x.empty()) return;
    double z1 = q.zi1 * x[0];
    double z2 = q.zi2 * x[0];
    for (double& v : x) {
        const double in = v;
        const double out = q.b0 * in + z1;
        z1 = q.b1 * in - q.a1 * out + z2;
        z2 = q.b2 * in - q.a2 * out;
        v = out;
    }
}

// Forward-backward pass with odd-reflection padding.
std::vector<double> filtfilt_once(const Biquad& q, const std::vector<double>& x, int padlen) {
    const std::size_t n = x.size();
    const std::size_t pad = std::min<std::size_t>(static_cast<std::size_t>(padlen), n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[0] - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    filter_in_place(q, ext);
    std::reverse(ext.begin(), ext.end());
    filter_in_place(q, ext);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

} // namespace

void PipelineConfig::validate() const {
    for (int i = 0; i + 1 < static_cast<int>(band_edges_hz.size()); ++i) {
        if (!(band_edges_hz[i] < band_edges_hz[i + 1]))
            throw ValidationError("PipelineConfig: band_edges_hz must be strictly ascending");
    }
    if (!(hop_s > 0.0) || !(hop_s <= window_s))
        throw ValidationError("PipelineConfig: requires 0 < hop_s <= window_s");
    if (!(smoothing_cutoff_hz > 0.0) || !(smoothing_cutoff_hz < 0.5 / hop_s))
        throw ValidationError(
            "PipelineConfig: smoothing_cutoff_hz must be below the frame-rate Nyquist");
    if (!(log_floor > 0.0)) throw ValidationError("PipelineConfig: log_floor must be positive");
    if (!(transition_width_hz > 0.0))
        throw ValidationError("PipelineConfig: transition_width_hz must be positive");
}

FramedSignal frame_signal(const AudioClip& clip, const PipelineConfig& config) {
    config.validate();
    if (clip.sample_rate <= 0)
        throw ValidationError("frame_signal: clip sample_rate must be positive");
    const int window = static_cast<int>(std::lround(config.window_s * clip.sample_rate));
    const int hop = static_cast<int>(std::lround(config.hop_s * clip.sample_rate));
    if (window <= 0 || hop <= 0)
        throw ValidationError("frame_signal: window and hop must round to >= 1 sample");
    const std::size_t n = clip.samples.size();
    if (n < static_cast<std::size_t>(window))
        throw ValidationError("frame_signal: clip shorter than one analysis window");

    // symmetric Hamming
    std::vector<double> hamming(static_cast<std::size_t>(window));
    if (window == 1) {
        hamming[0] = 1.0;
    } else {
        for (int k = 0; k < window; ++k)
            hamming[static_cast<std::size_t>(k)] =
                0.54 - 0.46 * std::cos(2.0 * kPi * k / (window - 1));
    }

    FramedSignal out;
    out.window_len = window;
    out.hop_len = hop;
    out.sample_rate = clip.sample_rate;
    const std::size_t count = (n - static_cast<std::size_t>(window)) /
                                  static_cast<std::size_t>(hop) +
                              1;
    out.frames.resize(count);
    for (std::size_t f = 0; f < count; ++f) {
        auto& frame = out.frames[f];
        frame.resize(static_cast<std::size_t>(window));
        const std::size_t off = f * static_cast<std::size_t>(hop);
        for (int k = 0; k < window; ++k)
            frame[static_cast<std::size_t>(k)] =
                clip.samples[off + static_cast<std::size_t>(k)] *
                hamming[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<std::array<double, kNumBands>> band_energies(const FramedSignal& frames,
                                                         const PipelineConfig& config) {
    const std::size_t window = static_cast<std::size_t>(frames.window_len);
    const std::size_t nfft = next_pow2(window);
    const std::size_t n_bins = nfft / 2 + 1; // non-negative frequencies
    const double bin_hz = static_cast<double>(frames.sample_rate) / static_cast<double>(nfft);

    // trapezoid weights at bin centers, per band
    std::vector<std::array<double, kNumBands>> bin_weights(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        const double f = bin_hz * static_cast<double>(k);
        for (int b = 0; b < kNumBands; ++b)
            bin_weights[k][static_cast<std::size_t>(b)] =
                trapezoid(f, config.band_edges_hz[static_cast<std::size_t>(b)],
                          config.band_edges_hz[static_cast<std::size_t>(b) + 1],
                          config.transition_width_hz);
    }

    std::vector<std::array<double, kNumBands>> energies(frames.frames.size());
    std::vector<std::complex<double>> spectrum(nfft);
    for (std::size_t fi = 0; fi < frames.frames.size(); ++fi) {
        const auto& frame = frames.frames[fi];
        std::fill(spectrum.begin(), spectrum.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t k = 0; k < frame.size(); ++k) spectrum[k] = frame[k];
        fft_pow2(spectrum);

        auto& e = energies[fi];
        e.fill(0.0);
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double mag2 = std::norm(spectrum[k]);
            if (mag2 == 0.0) continue;
            for (int b = 0; b < kNumBands; ++b)
                e[static_cast<std::size_t>(b)] +=
                    mag2 * bin_weights[k][static_cast<std::size_t>(b)];
        }
    }
    return energies;
}

BandEnergyMatrix normalize_and_log(const std::vector<std::array<double, kNumBands>>& raw,
                                   const PipelineConfig& config, double frame_rate_hz) {
    if (raw.empty()) throw ValidationError("normalize_and_log: needs at least one frame");
    std::array<double, kNumBands> band_max{};
    for (const auto& frame : raw)
        for (int b = 0; b < kNumBands; ++b)
            band_max[static_cast<std::size_t>(b)] =
                std::max(band_max[static_cast<std::size_t>(b)], frame[static_cast<std::size_t>(b)]);

    BandEnergyMatrix out;
    out.frame_rate_hz = frame_rate_hz;
    out.values.resize(raw.size());
    for (std::size_t fi = 0; fi < raw.size(); ++fi) {
        for (int b = 0; b < kNumBands; ++b) {
            const std::size_t bi = static_cast<std::size_t>(b);
            double v = raw[fi][bi];
            if (band_max[bi] > 0.0) v /= band_max[bi];
            out.values[fi][bi] = std::log(std::max(v, config.log_floor));
        }
    }
    return out;
}

SpeechMask speech_mask(const FramedSignal& frames, const PipelineConfig& config) {
    std::vector<double> energy(frames.frames.size(), 0.0);
    double max_energy = 0.0;
    for (std::size_t fi = 0; fi < frames.frames.size(); ++fi) {
        double e = 0.0;
        for (const double s : frames.frames[fi]) e += s * s;
        energy[fi] = e;
        max_energy = std::max(max_energy, e);
    }
    SpeechMask mask;
    mask.flags.assign(frames.frames.size(), 0);
    if (max_energy <= 0.0) return mask; // all-zero utterance: no speech frames
    // inclusive at the dB boundary; the relative epsilon absorbs
    // decimal-to-binary rounding of the threshold
    const double floor = max_energy * std::pow(10.0, config.energy_threshold_db / 10.0);
    for (std::size_t fi = 0; fi < energy.size(); ++fi)
        mask.flags[fi] = energy[fi] >= floor * (1.0 - 1e-12) ? 1 : 0;
    return mask;
}

SonorityEnvelope weighted_envelope(const BandEnergyMatrix& matrix, const WeightVector& weights) {
    SonorityEnvelope env;
    env.frame_rate_hz = matrix.frame_rate_hz;
    env.values.resize(matrix.frames());
    for (std::size_t fi = 0; fi < matrix.frames(); ++fi) {
        double sum = 0.0;
        for (int b = 0; b < kNumBands; ++b)
            sum += weights.w[static_cast<std::size_t>(b)] *
                   matrix.values[fi][static_cast<std::size_t>(b)];
        env.values[fi] = sum;
    }
    return env;
}

SonorityEnvelope smooth(const SonorityEnvelope& envelope, const PipelineConfig& config) {
    if (envelope.values.size() <= 1) return envelope;
    if (!(envelope.frame_rate_hz > 2.0 * config.smoothing_cutoff_hz))
        throw ValidationError("smooth: frame rate must exceed twice the smoothing cutoff");

    const Biquad q = design_butter2_lowpass(config.smoothing_cutoff_hz, envelope.frame_rate_hz);
    constexpr int kPadLen = 6; // 3 x filter order

    const std::vector<double> fb = filtfilt_once(q, envelope.values, kPadLen);
    std::vector<double> rev(envelope.values.rbegin(), envelope.values.rend());
    std::vector<double> bf = filtfilt_once(q, rev, kPadLen);
    std::reverse(bf.begin(), bf.end());

    SonorityEnvelope out;
    out.frame_rate_hz = envelope.frame_rate_hz;
    out.values.resize(fb.size());
    for (std::size_t i = 0; i < fb.size(); ++i) out.values[i] = 0.5 * (fb[i] + bf[i]);
    return out;
}

EnvelopeResult compute_envelope(const AudioClip& clip, const WeightVector& weights,
                                const PipelineConfig& config) {
    const FramedSignal frames = frame_signal(clip, config);
    const auto raw = band_energies(frames, config);
    const BandEnergyMatrix matrix = normalize_and_log(raw, config, frames.frame_rate_hz());
    EnvelopeResult result;
    result.envelope = smooth(weighted_envelope(matrix, weights), config);
    result.mask = speech_mask(frames, config);
    return result;
}

} // namespace sylrate
