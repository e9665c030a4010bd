#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pgcgan/toy.hpp"

using namespace pgcgan;

int main(int argc, char** argv) {
  CLI::App app{"generate a noisy-sinusoid gait benchmark dataset"};

  std::string out_path;
  std::string format = "jsonl";
  ToyOptions opt;
  app.add_option("out_path", out_path, "output file (jsonl) or directory (csv)")->required();
  app.add_option("--classes", opt.classes, "number of classes");
  app.add_option("--per-class", opt.per_class, "sequences per class");
  app.add_option("--dims", opt.dims, "dimensions per frame");
  app.add_option("--min-length", opt.min_length, "shortest source length");
  app.add_option("--max-length", opt.max_length, "longest source length");
  app.add_option("--noise", opt.noise, "additive noise scale");
  app.add_option("--seed", opt.seed, "seed");
  app.add_option("--format", format, "csv or jsonl");

  CLI11_PARSE(app, argc, argv);

  try {
    if (opt.classes < 2 || opt.per_class < 1 || opt.dims < 1)
      throw ValidationError("need classes >= 2, per-class >= 1, dims >= 1");
    if (opt.min_length < 2 || opt.max_length < opt.min_length)
      throw ValidationError("need 2 <= min-length <= max-length");

    const std::vector<GaitSequence> sequences = make_toy_sequences(opt);
    save_dataset(sequences, out_path, data_format_from_string(format));
    std::cout << "wrote " << sequences.size() << " sequences (" << opt.classes
              << " classes x " << opt.per_class << ", d=" << opt.dims << ") to " << out_path
              << "\n";
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
