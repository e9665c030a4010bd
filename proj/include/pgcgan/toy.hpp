#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/rng.hpp"

namespace pgcgan {

// Synthetic benchmark fixture: noisy class-conditioned sinusoids. Class c
// oscillates at c + 1 cycles per nominal window, so classes stay separable
// for a classifier while each class still has a clear mean curve to match.
struct ToyOptions {
  int classes = 3;
  int per_class = 400;
  int dims = 6;
  int min_length = 60;   // source lengths are drawn from [min_length, max_length]
  int max_length = 90;
  int nominal_window = 60;
  double noise = 0.05;
  double phase_jitter = 0.15;
  double amplitude_jitter = 0.08;
  std::uint64_t seed = 7;
};

inline std::vector<GaitSequence> make_toy_sequences(const ToyOptions& opt) {
  std::vector<std::string> names;
  for (int c = 0; c < opt.classes; ++c) names.push_back("c" + std::to_string(c));
  const VocabularyPtr vocab = make_vocabulary(names);

  std::vector<GaitSequence> out;
  out.reserve(static_cast<std::size_t>(opt.classes) * opt.per_class);
  const double two_pi = 2.0 * std::numbers::pi;

  for (int c = 0; c < opt.classes; ++c) {
    Rng rng = Rng::stream(opt.seed, 0x746f79ull + static_cast<std::uint64_t>(c));
    const double freq = static_cast<double>(c + 1);
    const double base_phase = 0.5 * c;
    for (int i = 0; i < opt.per_class; ++i) {
      const int span = opt.max_length - opt.min_length;
      const int length =
          opt.min_length +
          (span > 0 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(span + 1))) : 0);
      const double phase = base_phase + opt.phase_jitter * rng.normal();
      const double amp = 1.0 + opt.amplitude_jitter * rng.normal();

      GaitSequence seq;
      seq.frames.resize(length, opt.dims);
      for (int t = 0; t < length; ++t)
        for (int j = 0; j < opt.dims; ++j) {
          const double a = amp * (1.0 + 0.25 * j);
          const double angle =
              two_pi * freq * (static_cast<double>(t) / opt.nominal_window) + phase + 0.4 * j;
          seq.frames(t, j) = a * std::sin(angle) + 0.1 * j + opt.noise * rng.normal();
        }
      seq.label = {c, vocab};
      seq.subject_id = "toy_s" + std::to_string(c) + "_" + std::to_string(i % 25);
      seq.id = "toy_" + names[c] + "_" + std::to_string(i);
      seq.source_length = length;
      out.push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace pgcgan
