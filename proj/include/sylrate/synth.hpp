#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sylrate/audio_io.hpp"

namespace sylrate {

// Recipe for one synthetic utterance with exactly known syllable nuclei.
// formant_bands holds 1-based band numbers (1..7).
struct SynthSpec {
    int n_syllables = 5;
    double syllable_dur_s = 0.18;
    double gap_dur_s = 0.08;
    double f0_hz = 120.0; // 220 for child-like voices
    std::vector<int> formant_bands{1, 2, 3};
    double fricative_prob = 0.3; // probability a gap carries high-band noise
    double noise_db = -40.0;     // floor noise relative to vowel peak
    int sample_rate = 16000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthUtterance {
    AudioClip clip;
    UtteranceRecord record;            // audio + padded vowel segments + count
    std::vector<double> nucleus_times_s; // envelope maximum of each syllable
};

// Each syllable is a raised-cosine amplitude envelope over a harmonic tone
// (f0 and harmonics inside the chosen formant bands); gaps are silence or,
// with fricative_prob, band-limited noise in bands 6-7 at -10 dB relative to
// the vowel peaks. Ground-truth nucleus = syllable envelope maximum; vowel
// segment = central 60% of the syllable, then padded by the audio-io rule.
// Bit-identical for a fixed seed.
SynthUtterance gen_utterance(const SynthSpec& spec, const std::string& id = "synth");

// n_utterances records with per-utterance syllable counts drawn uniformly in
// [min_syllables, max_syllables] and per-utterance seeds derived from seed.
Corpus gen_corpus(const SynthSpec& base_spec, int n_utterances, int min_syllables,
                  int max_syllables, std::uint64_t seed);

// Writes wavs plus manifest.json (explicit nuclei segments) to out_dir in the
// layout load_corpus consumes. Returns the manifest path.
std::string write_corpus(const Corpus& corpus, const std::string& out_dir);

// SynthSpec JSON round-trip with the field names above.
SynthSpec load_synth_spec(const std::string& path);
void save_synth_spec(const std::string& path, const SynthSpec& spec);

} // namespace sylrate
