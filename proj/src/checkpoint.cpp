#include <bit>
#include <fstream>

#include "pgcgan/training.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "parameter files are little endian");

namespace fs = std::filesystem;
using nlohmann::json;

namespace pgcgan {

namespace {

constexpr const char* kKind = "pgcgan-checkpoint";

void write_doubles(const fs::path& path, const double* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw ValidationError("short write to " + path.string());
}

void read_doubles(const fs::path& path, double* data, std::size_t n) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ValidationError("missing parameter file " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != n * sizeof(double))
    throw ValidationError(path.string() + ": expected " + std::to_string(n * sizeof(double)) +
                          " bytes, found " + std::to_string(bytes));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw ValidationError("short read from " + path.string());
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<long>(i)) = a[i].get<double>();
  return v;
}

json generator_config_json(const GeneratorConfig& c) {
  return {{"T", c.T},
          {"d", c.d},
          {"C", c.C},
          {"latent_dim", c.latent_dim},
          {"encoder_channels", c.encoder_channels},
          {"decoder_channels", c.decoder_channels},
          {"kernel_size", c.kernel_size},
          {"seed", c.seed}};
}

GeneratorConfig generator_config_from_json(const json& j) {
  GeneratorConfig c;
  c.T = j.at("T").get<int>();
  c.d = j.at("d").get<int>();
  c.C = j.at("C").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
  c.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json discriminator_config_json(const DiscriminatorConfig& c) {
  return {{"T", c.T},
          {"d", c.d},
          {"C", c.C},
          {"conv_channels", c.conv_channels},
          {"fc_widths", c.fc_widths},
          {"kernel_size", c.kernel_size},
          {"stride", c.stride},
          {"seed", c.seed}};
}

DiscriminatorConfig discriminator_config_from_json(const json& j) {
  DiscriminatorConfig c;
  c.T = j.at("T").get<int>();
  c.d = j.at("d").get<int>();
  c.C = j.at("C").get<int>();
  c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  c.fc_widths = j.at("fc_widths").get<std::vector<int>>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.stride = j.at("stride").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json adam_json(const nn::Adam& adam) {
  json slots = json::array();
  for (const auto& [name, slot] : adam.slots()) slots.push_back(name);
  return {{"lr", adam.learning_rate()},
          {"beta1", adam.beta1()},
          {"beta2", adam.beta2()},
          {"step", adam.step()},
          {"slots", slots}};
}

void save_adam(const fs::path& dir, const std::string& prefix, const nn::Adam& adam) {
  for (const auto& [name, slot] : adam.slots()) {
    write_doubles(dir / (prefix + "." + name + ".m.bin"), slot.m.data(),
                  static_cast<std::size_t>(slot.m.size()));
    write_doubles(dir / (prefix + "." + name + ".v.bin"), slot.v.data(),
                  static_cast<std::size_t>(slot.v.size()));
  }
}

nn::Adam load_adam(const fs::path& dir, const std::string& prefix, const json& j,
                   const std::vector<nn::ParamRef>& params) {
  nn::Adam adam(j.at("lr").get<double>(), j.at("beta1").get<double>(),
                j.at("beta2").get<double>());
  adam.set_step(j.at("step").get<long>());
  std::map<std::string, std::size_t> sizes;
  for (const auto& p : params) sizes[p.name] = p.size;
  for (const auto& name_json : j.at("slots")) {
    const auto name = name_json.get<std::string>();
    auto it = sizes.find(name);
    if (it == sizes.end())
      throw ValidationError("checkpoint optimizer slot for unknown parameter " + name);
    nn::Adam::Slot slot;
    slot.m.resize(static_cast<long>(it->second));
    slot.v.resize(static_cast<long>(it->second));
    read_doubles(dir / (prefix + "." + name + ".m.bin"), slot.m.data(), it->second);
    read_doubles(dir / (prefix + "." + name + ".v.bin"), slot.v.data(), it->second);
    adam.slots().emplace(name, std::move(slot));
  }
  return adam;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const Checkpoint& checkpoint) {
  fs::create_directories(dir);

  // const_cast only to reuse the ParamRef views; nothing is written through them
  auto& g = const_cast<GeneratorModel&>(checkpoint.generator);
  auto& d = const_cast<DiscriminatorModel&>(checkpoint.discriminator);
  std::vector<nn::ParamRef> params = generator_params(g);
  for (auto& p : discriminator_params(d)) params.push_back(p);

  json meta;
  meta["kind"] = kKind;
  meta["generator"] = generator_config_json(checkpoint.generator.config);
  meta["discriminator"] = discriminator_config_json(checkpoint.discriminator.config);
  meta["vocabulary"] =
      checkpoint.vocabulary ? checkpoint.vocabulary->names : std::vector<std::string>{};
  meta["normalization"] = {{"mean", vector_to_json(checkpoint.normalization.mean)},
                           {"std", vector_to_json(checkpoint.normalization.stddev)}};

  json plist = json::array();
  for (const auto& p : params) {
    plist.push_back({{"name", p.name}, {"shape", p.shape}});
    write_doubles(dir / (p.name + ".bin"), p.data, p.size);
  }
  meta["params"] = plist;

  if (checkpoint.state) {
    const TrainingState& s = *checkpoint.state;
    const Rng::State rs = s.rng.save();
    json state;
    state["step"] = s.step;
    state["d_acc_ema"] = s.d_acc_ema;
    state["band_steps"] = s.band_steps;
    state["rng"] = {{"state", rs.state}, {"has_spare", rs.has_spare}, {"spare", rs.spare}};
    state["adam_g"] = adam_json(s.adam_g);
    state["adam_d"] = adam_json(s.adam_d);
    json hist;
    hist["step"] = json::array();
    hist["l_d"] = json::array();
    hist["l_g_adv"] = json::array();
    hist["l_rec"] = json::array();
    hist["d_acc_ema"] = json::array();
    for (const auto& rec : s.history) {
      hist["step"].push_back(rec.step);
      hist["l_d"].push_back(rec.l_d);
      hist["l_g_adv"].push_back(rec.l_g_adv);
      hist["l_rec"].push_back(rec.l_rec);
      hist["d_acc_ema"].push_back(rec.d_acc_ema);
    }
    state["history"] = hist;
    meta["state"] = state;
    save_adam(dir, "opt_g", s.adam_g);
    save_adam(dir, "opt_d", s.adam_d);
  }

  std::ofstream out(dir / "config.json");
  if (!out) throw ValidationError("cannot write " + (dir / "config.json").string());
  out << meta.dump(2) << "\n";
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw ValidationError("no checkpoint at " + dir.string());
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ValidationError((dir / "config.json").string() + ": " + e.what());
  }
  if (!meta.contains("kind") || meta["kind"] != kKind)
    throw ValidationError(dir.string() + " is not a checkpoint directory");

  Checkpoint checkpoint;
  try {
    checkpoint.generator = init_generator(generator_config_from_json(meta.at("generator")));
    checkpoint.discriminator =
        init_discriminator(discriminator_config_from_json(meta.at("discriminator")));
    checkpoint.vocabulary = make_vocabulary(meta.at("vocabulary").get<std::vector<std::string>>());
    checkpoint.normalization.mean = vector_from_json(meta.at("normalization").at("mean"));
    checkpoint.normalization.stddev = vector_from_json(meta.at("normalization").at("std"));

    std::vector<nn::ParamRef> params = generator_params(checkpoint.generator);
    for (auto& p : discriminator_params(checkpoint.discriminator)) params.push_back(p);
    std::map<std::string, const nn::ParamRef*> by_name;
    for (const auto& p : params) by_name[p.name] = &p;

    for (const auto& entry : meta.at("params")) {
      const auto name = entry.at("name").get<std::string>();
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw ValidationError("checkpoint parameter " + name + " does not fit the model");
      if (entry.at("shape").get<std::vector<int>>() != it->second->shape)
        throw ValidationError("checkpoint parameter " + name + " has the wrong shape");
      read_doubles(dir / (name + ".bin"), it->second->data, it->second->size);
      by_name.erase(it);
    }
    if (!by_name.empty())
      throw ValidationError("checkpoint is missing parameter " + by_name.begin()->first);

    if (meta.contains("state")) {
      const json& sj = meta.at("state");
      TrainingState state;
      state.step = sj.at("step").get<long>();
      state.d_acc_ema = sj.at("d_acc_ema").get<double>();
      state.band_steps = sj.at("band_steps").get<int>();
      Rng::State rs;
      rs.state = sj.at("rng").at("state").get<std::uint64_t>();
      rs.has_spare = sj.at("rng").at("has_spare").get<bool>();
      rs.spare = sj.at("rng").at("spare").get<double>();
      state.rng.restore(rs);
      state.adam_g = load_adam(dir, "opt_g", sj.at("adam_g"),
                               generator_params(checkpoint.generator));
      state.adam_d = load_adam(dir, "opt_d", sj.at("adam_d"),
                               discriminator_params(checkpoint.discriminator));
      const json& hist = sj.at("history");
      const std::size_t n = hist.at("step").size();
      for (std::size_t i = 0; i < n; ++i)
        state.history.push_back({hist.at("step")[i].get<long>(), hist.at("l_d")[i].get<double>(),
                                 hist.at("l_g_adv")[i].get<double>(),
                                 hist.at("l_rec")[i].get<double>(),
                                 hist.at("d_acc_ema")[i].get<double>()});
      checkpoint.state = std::move(state);
    }
  } catch (const json::exception& e) {
    throw ValidationError("malformed checkpoint " + dir.string() + ": " + e.what());
  }
  return checkpoint;
}

}  // namespace pgcgan
