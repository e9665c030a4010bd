#include "pgcgan/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "pgcgan/classify.hpp"
#include "json.hpp"

using nlohmann::json;

namespace pgcgan {

namespace {

struct Field {
  std::string path;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

[[noreturn]] void type_error(const std::string& path, const char* expected) {
  throw ValidationError("config key '" + path + "' must be " + expected);
}

long as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) type_error(path, "an integer");
  return v.get<long>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) type_error(path, "a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) type_error(path, "a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) type_error(path, "a string");
  return v.get<std::string>();
}

std::vector<int> as_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) type_error(path, "a list of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) type_error(path, "a list of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<std::string> as_string_list(const json& v, const std::string& path) {
  if (!v.is_array()) type_error(path, "a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) type_error(path, "a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::map<std::string, int> as_count_map(const json& v, const std::string& path) {
  if (!v.is_object()) type_error(path, "an object of class -> count");
  std::map<std::string, int> out;
  for (const auto& [k, e] : v.items()) {
    if (!e.is_number_integer()) type_error(path, "an object of class -> count");
    out[k] = e.get<int>();
  }
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto add = [&](std::string path, std::function<void(RunConfig&, const json&)> set,
                   std::function<json(const RunConfig&)> get) {
      f.push_back({std::move(path), std::move(set), std::move(get)});
    };

    add("seed",
        [](RunConfig& c, const json& v) {
          if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                         v.get<long long>() < 0))
            type_error("seed", "a non-negative integer");
          c.seed = v.get<std::uint64_t>();
          c.seed_explicit = true;
        },
        [](const RunConfig& c) { return json(c.seed); });

    add("data.format",
        [](RunConfig& c, const json& v) {
          c.data.format = data_format_from_string(as_string(v, "data.format"));
        },
        [](const RunConfig& c) { return json(to_string(c.data.format)); });
    add("data.min_length",
        [](RunConfig& c, const json& v) {
          c.data.min_length = static_cast<int>(as_int(v, "data.min_length"));
        },
        [](const RunConfig& c) { return json(c.data.min_length); });
    add("data.window",
        [](RunConfig& c, const json& v) {
          c.data.window = static_cast<int>(as_int(v, "data.window"));
        },
        [](const RunConfig& c) { return json(c.data.window); });
    add("data.window_policy",
        [](RunConfig& c, const json& v) {
          c.data.window_policy = window_policy_from_string(as_string(v, "data.window_policy"));
        },
        [](const RunConfig& c) { return json(to_string(c.data.window_policy)); });
    add("data.test_fraction",
        [](RunConfig& c, const json& v) {
          c.data.test_fraction = as_double(v, "data.test_fraction");
        },
        [](const RunConfig& c) { return json(c.data.test_fraction); });

    add("model.latent_dim",
        [](RunConfig& c, const json& v) {
          c.model.latent_dim = static_cast<int>(as_int(v, "model.latent_dim"));
        },
        [](const RunConfig& c) { return json(c.model.latent_dim); });
    add("model.encoder_channels",
        [](RunConfig& c, const json& v) {
          c.model.encoder_channels = as_int_list(v, "model.encoder_channels");
        },
        [](const RunConfig& c) { return json(c.model.encoder_channels); });
    add("model.decoder_channels",
        [](RunConfig& c, const json& v) {
          c.model.decoder_channels = as_int_list(v, "model.decoder_channels");
        },
        [](const RunConfig& c) { return json(c.model.decoder_channels); });
    add("model.kernel_size",
        [](RunConfig& c, const json& v) {
          c.model.kernel_size = static_cast<int>(as_int(v, "model.kernel_size"));
        },
        [](const RunConfig& c) { return json(c.model.kernel_size); });
    add("model.disc_channels",
        [](RunConfig& c, const json& v) {
          c.model.disc_channels = as_int_list(v, "model.disc_channels");
        },
        [](const RunConfig& c) { return json(c.model.disc_channels); });
    add("model.disc_fc",
        [](RunConfig& c, const json& v) { c.model.disc_fc = as_int_list(v, "model.disc_fc"); },
        [](const RunConfig& c) { return json(c.model.disc_fc); });
    add("model.disc_stride",
        [](RunConfig& c, const json& v) {
          c.model.disc_stride = static_cast<int>(as_int(v, "model.disc_stride"));
        },
        [](const RunConfig& c) { return json(c.model.disc_stride); });

    add("training.lambda_adv",
        [](RunConfig& c, const json& v) {
          c.training.lambda_adv = as_double(v, "training.lambda_adv");
        },
        [](const RunConfig& c) { return json(c.training.lambda_adv); });
    add("training.lambda_rec",
        [](RunConfig& c, const json& v) {
          c.training.lambda_rec = as_double(v, "training.lambda_rec");
        },
        [](const RunConfig& c) { return json(c.training.lambda_rec); });
    add("training.learning_rate_g",
        [](RunConfig& c, const json& v) {
          c.training.learning_rate_g = as_double(v, "training.learning_rate_g");
        },
        [](const RunConfig& c) { return json(c.training.learning_rate_g); });
    add("training.learning_rate_d",
        [](RunConfig& c, const json& v) {
          c.training.learning_rate_d = as_double(v, "training.learning_rate_d");
        },
        [](const RunConfig& c) { return json(c.training.learning_rate_d); });
    add("training.adam_beta1",
        [](RunConfig& c, const json& v) {
          c.training.adam_beta1 = as_double(v, "training.adam_beta1");
        },
        [](const RunConfig& c) { return json(c.training.adam_beta1); });
    add("training.adam_beta2",
        [](RunConfig& c, const json& v) {
          c.training.adam_beta2 = as_double(v, "training.adam_beta2");
        },
        [](const RunConfig& c) { return json(c.training.adam_beta2); });
    add("training.batch_size",
        [](RunConfig& c, const json& v) {
          c.training.batch_size = static_cast<int>(as_int(v, "training.batch_size"));
        },
        [](const RunConfig& c) { return json(c.training.batch_size); });
    add("training.max_steps",
        [](RunConfig& c, const json& v) {
          c.training.max_steps = static_cast<int>(as_int(v, "training.max_steps"));
        },
        [](const RunConfig& c) { return json(c.training.max_steps); });
    add("training.d_steps_per_g_step",
        [](RunConfig& c, const json& v) {
          c.training.d_steps_per_g_step =
              static_cast<int>(as_int(v, "training.d_steps_per_g_step"));
        },
        [](const RunConfig& c) { return json(c.training.d_steps_per_g_step); });
    add("training.ema_decay",
        [](RunConfig& c, const json& v) {
          c.training.ema_decay = as_double(v, "training.ema_decay");
        },
        [](const RunConfig& c) { return json(c.training.ema_decay); });
    add("training.stop_band_low",
        [](RunConfig& c, const json& v) {
          c.training.stop_band_low = as_double(v, "training.stop_band_low");
        },
        [](const RunConfig& c) { return json(c.training.stop_band_low); });
    add("training.stop_band_high",
        [](RunConfig& c, const json& v) {
          c.training.stop_band_high = as_double(v, "training.stop_band_high");
        },
        [](const RunConfig& c) { return json(c.training.stop_band_high); });
    add("training.stop_patience",
        [](RunConfig& c, const json& v) {
          c.training.stop_patience = static_cast<int>(as_int(v, "training.stop_patience"));
        },
        [](const RunConfig& c) { return json(c.training.stop_patience); });
    add("training.divergence_threshold",
        [](RunConfig& c, const json& v) {
          c.training.divergence_threshold = as_double(v, "training.divergence_threshold");
        },
        [](const RunConfig& c) { return json(c.training.divergence_threshold); });
    add("training.checkpoint_every",
        [](RunConfig& c, const json& v) {
          c.training.checkpoint_every = static_cast<int>(as_int(v, "training.checkpoint_every"));
        },
        [](const RunConfig& c) { return json(c.training.checkpoint_every); });

    add("synthesis.per_class",
        [](RunConfig& c, const json& v) {
          c.synthesis.per_class = static_cast<int>(as_int(v, "synthesis.per_class"));
        },
        [](const RunConfig& c) { return json(c.synthesis.per_class); });
    add("synthesis.counts",
        [](RunConfig& c, const json& v) {
          c.synthesis.counts = as_count_map(v, "synthesis.counts");
        },
        [](const RunConfig& c) { return json(c.synthesis.counts); });
    add("synthesis.denormalize",
        [](RunConfig& c, const json& v) {
          c.synthesis.denormalize = as_bool(v, "synthesis.denormalize");
        },
        [](const RunConfig& c) { return json(c.synthesis.denormalize); });
    add("synthesis.format",
        [](RunConfig& c, const json& v) {
          c.synthesis.format = data_format_from_string(as_string(v, "synthesis.format"));
        },
        [](const RunConfig& c) { return json(to_string(c.synthesis.format)); });

    add("evaluation.pca_components",
        [](RunConfig& c, const json& v) {
          c.evaluation.pca_components = static_cast<int>(as_int(v, "evaluation.pca_components"));
        },
        [](const RunConfig& c) { return json(c.evaluation.pca_components); });
    add("evaluation.perplexity",
        [](RunConfig& c, const json& v) {
          c.evaluation.perplexity = as_double(v, "evaluation.perplexity");
        },
        [](const RunConfig& c) { return json(c.evaluation.perplexity); });
    add("evaluation.tsne_iters",
        [](RunConfig& c, const json& v) {
          c.evaluation.tsne_iters = static_cast<int>(as_int(v, "evaluation.tsne_iters"));
        },
        [](const RunConfig& c) { return json(c.evaluation.tsne_iters); });
    add("evaluation.max_points_per_side",
        [](RunConfig& c, const json& v) {
          c.evaluation.max_points_per_side =
              static_cast<int>(as_int(v, "evaluation.max_points_per_side"));
        },
        [](const RunConfig& c) { return json(c.evaluation.max_points_per_side); });

    add("classify.models",
        [](RunConfig& c, const json& v) {
          auto models = as_string_list(v, "classify.models");
          for (const auto& name : models) classifier_kind_from_string(name);
          if (models.empty()) type_error("classify.models", "a non-empty list of strings");
          c.classify.models = std::move(models);
        },
        [](const RunConfig& c) { return json(c.classify.models); });
    add("classify.hidden",
        [](RunConfig& c, const json& v) {
          c.classify.hidden = static_cast<int>(as_int(v, "classify.hidden"));
        },
        [](const RunConfig& c) { return json(c.classify.hidden); });
    add("classify.layers",
        [](RunConfig& c, const json& v) {
          c.classify.layers = static_cast<int>(as_int(v, "classify.layers"));
        },
        [](const RunConfig& c) { return json(c.classify.layers); });
    add("classify.conv_channels",
        [](RunConfig& c, const json& v) {
          c.classify.conv_channels = as_int_list(v, "classify.conv_channels");
        },
        [](const RunConfig& c) { return json(c.classify.conv_channels); });
    add("classify.kernel_size",
        [](RunConfig& c, const json& v) {
          c.classify.kernel_size = static_cast<int>(as_int(v, "classify.kernel_size"));
        },
        [](const RunConfig& c) { return json(c.classify.kernel_size); });
    add("classify.conv_stride",
        [](RunConfig& c, const json& v) {
          c.classify.conv_stride = static_cast<int>(as_int(v, "classify.conv_stride"));
        },
        [](const RunConfig& c) { return json(c.classify.conv_stride); });
    add("classify.dropout",
        [](RunConfig& c, const json& v) {
          c.classify.dropout = as_double(v, "classify.dropout");
        },
        [](const RunConfig& c) { return json(c.classify.dropout); });
    add("classify.learning_rate",
        [](RunConfig& c, const json& v) {
          c.classify.learning_rate = as_double(v, "classify.learning_rate");
        },
        [](const RunConfig& c) { return json(c.classify.learning_rate); });
    add("classify.epochs",
        [](RunConfig& c, const json& v) {
          c.classify.epochs = static_cast<int>(as_int(v, "classify.epochs"));
        },
        [](const RunConfig& c) { return json(c.classify.epochs); });
    add("classify.batch_size",
        [](RunConfig& c, const json& v) {
          c.classify.batch_size = static_cast<int>(as_int(v, "classify.batch_size"));
        },
        [](const RunConfig& c) { return json(c.classify.batch_size); });
    add("classify.baseline",
        [](RunConfig& c, const json& v) {
          c.classify.baseline = as_double(v, "classify.baseline");
        },
        [](const RunConfig& c) { return json(c.classify.baseline); });

    return f;
  }();
  return table;
}

const Field* find_field(const std::string& path) {
  for (const auto& f : fields())
    if (f.path == path) return &f;
  return nullptr;
}

void apply_tree(RunConfig& config, const json& node, const std::string& prefix) {
  if (!node.is_object())
    throw ValidationError("config key '" + (prefix.empty() ? "<root>" : prefix) +
                          "' must be an object");
  for (const auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (const Field* f = find_field(path)) {
      f->set(config, value);
    } else if (value.is_object() && !prefix.empty()) {
      throw ValidationError("unknown config key '" + path + "'");
    } else if (value.is_object()) {
      apply_tree(config, value, path);
    } else {
      throw ValidationError("unknown config key '" + path + "'");
    }
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
  apply_tree(config, doc, "");
  return config;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  if (file.empty()) return RunConfig{};
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ValidationError("unknown config key '" + key + "'");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare string, e.g. --data.format=jsonl
  }
  f->set(config, parsed);
}

std::string run_config_to_json(const RunConfig& config) {
  json doc = json::object();
  for (const auto& f : fields()) {
    json* node = &doc;
    std::string rest = f.path;
    for (std::size_t dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      node = &(*node)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = f.get(config);
  }
  return doc.dump(2);
}

}  // namespace pgcgan
