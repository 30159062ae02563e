#include "sylrate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "sylrate/envelope.hpp"
#include "sylrate/errors.hpp"

namespace sylrate {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// raised cosine over [0,1], peak 1 at tau = 0.5
double raised_cosine(double tau) { return 0.5 * (1.0 - std::cos(kTwoPi * tau)); }

} // namespace

void SynthSpec::validate() const {
    if (n_syllables < 0) throw ValidationError("SynthSpec: n_syllables must be >= 0");
    if (!(syllable_dur_s > 0.0) || !(gap_dur_s > 0.0))
        throw ValidationError("SynthSpec: durations must be positive");
    if (!(f0_hz > 0.0)) throw ValidationError("SynthSpec: f0_hz must be positive");
    if (fricative_prob < 0.0 || fricative_prob > 1.0)
        throw ValidationError("SynthSpec: fricative_prob must lie in [0,1]");
    if (sample_rate <= 0) throw ValidationError("SynthSpec: sample_rate must be positive");
    if (formant_bands.empty())
        throw ValidationError("SynthSpec: formant_bands must not be empty");
    for (const int b : formant_bands)
        if (b < 1 || b > kNumBands)
            throw ValidationError("SynthSpec: formant band numbers must lie in 1..7");
}

SynthUtterance gen_utterance(const SynthSpec& spec, const std::string& id) {
    spec.validate();
    const PipelineConfig defaults; // analysis band edges
    const auto& edges = defaults.band_edges_hz;

    // harmonics of f0 inside any chosen band
    std::vector<double> harmonics;
    for (int k = 1; k * spec.f0_hz <= edges.back(); ++k) {
        const double f = k * spec.f0_hz;
        for (const int b : spec.formant_bands) {
            if (f >= edges[static_cast<std::size_t>(b - 1)] &&
                f <= edges[static_cast<std::size_t>(b)]) {
                harmonics.push_back(f);
                break;
            }
        }
    }
    if (spec.n_syllables > 0 && harmonics.empty())
        throw ValidationError("SynthSpec: no harmonics of f0 fall inside the chosen bands");

    const int n = spec.n_syllables;
    const double total_s = n * spec.syllable_dur_s + (n + 1) * spec.gap_dur_s;
    const std::size_t n_samples =
        static_cast<std::size_t>(std::lround(total_s * spec.sample_rate));
    const double fs = spec.sample_rate;

    std::mt19937_64 rng(spec.seed);
    std::vector<double> x(n_samples, 0.0);

    SynthUtterance out;
    out.record.id = id;
    out.record.syllable_count = n;

    // syllables
    for (int s = 0; s < n; ++s) {
        const double start = (s + 1) * spec.gap_dur_s + s * spec.syllable_dur_s;
        const double amp = 0.7 + 0.3 * uniform01(rng);
        std::vector<double> phases(harmonics.size());
        for (auto& p : phases) p = kTwoPi * uniform01(rng);

        const std::size_t i0 = static_cast<std::size_t>(std::lround(start * fs));
        const std::size_t i1 = std::min(
            n_samples,
            static_cast<std::size_t>(std::lround((start + spec.syllable_dur_s) * fs)));
        const double harmonic_gain = amp / static_cast<double>(harmonics.size());
        for (std::size_t i = i0; i < i1; ++i) {
            const double t = static_cast<double>(i) / fs;
            const double tau = (t - start) / spec.syllable_dur_s;
            double tone = 0.0;
            for (std::size_t h = 0; h < harmonics.size(); ++h)
                tone += std::sin(kTwoPi * harmonics[h] * t + phases[h]);
            x[i] += harmonic_gain * raised_cosine(tau) * tone;
        }

        out.nucleus_times_s.push_back(start + 0.5 * spec.syllable_dur_s);
        const double seg_start = start + 0.2 * spec.syllable_dur_s;
        const double seg_end = start + 0.8 * spec.syllable_dur_s;
        out.record.vowel_segments.push_back(
            pad_vowel_segment({seg_start, seg_end}, total_s));
    }

    // gaps: silence or band-limited fricative noise in bands 6-7 at -10 dB
    const double fric_band_lo = edges[5] + 100.0;
    const double fric_band_hi = edges[7] - 100.0;
    const double fric_amp = std::pow(10.0, -10.0 / 20.0);
    for (int gidx = 0; gidx <= n; ++gidx) {
        const double coin = uniform01(rng);
        if (coin >= spec.fricative_prob) continue;
        std::vector<double> comp_freqs;
        for (double f = fric_band_lo; f <= fric_band_hi; f += 150.0) comp_freqs.push_back(f);
        std::vector<double> comp_phases(comp_freqs.size());
        for (auto& p : comp_phases) p = kTwoPi * uniform01(rng);

        const double gstart = gidx * (spec.gap_dur_s + spec.syllable_dur_s);
        const std::size_t i0 = static_cast<std::size_t>(std::lround(gstart * fs));
        const std::size_t i1 = std::min(
            n_samples, static_cast<std::size_t>(std::lround((gstart + spec.gap_dur_s) * fs)));
        const double comp_gain = fric_amp / std::sqrt(static_cast<double>(comp_freqs.size()));
        for (std::size_t i = i0; i < i1; ++i) {
            const double t = static_cast<double>(i) / fs;
            const double tau = (t - gstart) / spec.gap_dur_s;
            double noise = 0.0;
            for (std::size_t c = 0; c < comp_freqs.size(); ++c)
                noise += std::sin(kTwoPi * comp_freqs[c] * t + comp_phases[c]);
            x[i] += comp_gain * raised_cosine(tau) * noise;
        }
    }

    // noise floor over the whole clip
    const double floor_amp = std::pow(10.0, spec.noise_db / 20.0);
    for (auto& v : x) v += floor_amp * (2.0 * uniform01(rng) - 1.0);

    // keep within [-1, 1]; scale down only, so silent clips stay silent
    double peak = 0.0;
    for (const double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.95) {
        const double scale = 0.95 / peak;
        for (auto& v : x) v *= scale;
    }

    out.clip.samples = x;
    out.clip.sample_rate = spec.sample_rate;
    out.record.audio = out.clip;
    return out;
}

Corpus gen_corpus(const SynthSpec& base_spec, int n_utterances, int min_syllables,
                  int max_syllables, std::uint64_t seed) {
    if (n_utterances < 1) throw ValidationError("gen_corpus: n_utterances must be >= 1");
    if (min_syllables < 0 || max_syllables < min_syllables)
        throw ValidationError("gen_corpus: invalid syllable-count range");
    std::mt19937_64 master(seed);
    Corpus corpus;
    corpus.utterances.reserve(static_cast<std::size_t>(n_utterances));
    for (int u = 0; u < n_utterances; ++u) {
        SynthSpec spec = base_spec;
        const int span = max_syllables - min_syllables + 1;
        spec.n_syllables =
            min_syllables + static_cast<int>(uniform01(master) * span) % span;
        spec.seed = master();
        char id[16];
        std::snprintf(id, sizeof id, "utt_%04d", u);
        corpus.utterances.push_back(gen_utterance(spec, id).record);
    }
    return corpus;
}

std::string write_corpus(const Corpus& corpus, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json manifest;
    manifest["vowel_labels"] = nlohmann::json::array();
    auto& utts = manifest["utterances"];
    utts = nlohmann::json::array();
    for (const auto& rec : corpus.utterances) {
        const std::string wav_name = rec.id + ".wav";
        write_wav((std::filesystem::path(out_dir) / wav_name).string(), rec.audio);
        nlohmann::json entry;
        entry["id"] = rec.id;
        entry["wav"] = wav_name;
        auto& nuclei = entry["nuclei"];
        nuclei = nlohmann::json::array();
        for (const auto& seg : rec.vowel_segments)
            nuclei.push_back({seg.start_s, seg.end_s});
        utts.push_back(std::move(entry));
    }
    const std::string manifest_path =
        (std::filesystem::path(out_dir) / "manifest.json").string();
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write manifest: " + manifest_path);
    out << manifest.dump(2) << "\n";
    return manifest_path;
}

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synth spec: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    SynthSpec spec;
    try {
        if (doc.contains("n_syllables")) spec.n_syllables = doc["n_syllables"].get<int>();
        if (doc.contains("syllable_dur_s")) spec.syllable_dur_s = doc["syllable_dur_s"].get<double>();
        if (doc.contains("gap_dur_s")) spec.gap_dur_s = doc["gap_dur_s"].get<double>();
        if (doc.contains("f0_hz")) spec.f0_hz = doc["f0_hz"].get<double>();
        if (doc.contains("formant_bands"))
            spec.formant_bands = doc["formant_bands"].get<std::vector<int>>();
        if (doc.contains("fricative_prob")) spec.fricative_prob = doc["fricative_prob"].get<double>();
        if (doc.contains("noise_db")) spec.noise_db = doc["noise_db"].get<double>();
        if (doc.contains("sample_rate")) spec.sample_rate = doc["sample_rate"].get<int>();
        if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    spec.validate();
    return spec;
}

void save_synth_spec(const std::string& path, const SynthSpec& spec) {
    nlohmann::json doc;
    doc["n_syllables"] = spec.n_syllables;
    doc["syllable_dur_s"] = spec.syllable_dur_s;
    doc["gap_dur_s"] = spec.gap_dur_s;
    doc["f0_hz"] = spec.f0_hz;
    doc["formant_bands"] = spec.formant_bands;
    doc["fricative_prob"] = spec.fricative_prob;
    doc["noise_db"] = spec.noise_db;
    doc["sample_rate"] = spec.sample_rate;
    doc["seed"] = spec.seed;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write synth spec: " + path);
    out << doc.dump(2) << "\n";
}

} // namespace sylrate
