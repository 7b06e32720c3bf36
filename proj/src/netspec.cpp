#include "lts/netspec.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lts/error.hpp"

namespace lts::net {

namespace {

std::string_view kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::DenseBlock: return "dense_block";
    case LayerKind::MaxPool: return "max_pool";
    case LayerKind::UpConv: return "up_conv";
  }
  return "?";
}

std::size_t parse_count(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  std::size_t v = 0;
  try {
    if (!text.empty() && text[0] != '-') v = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorKind::Parse, where + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::string to_string(const Shape& s) { return fmt::format("{}x{}x{}", s.h, s.w, s.c); }

Shape parse_shape(const std::string& text) {
  Shape s;
  char x1 = 0, x2 = 0;
  std::istringstream in(text);
  if (!(in >> s.h >> x1 >> s.w >> x2 >> s.c) || x1 != 'x' || x2 != 'x' || !in.eof() || s.h == 0 || s.w == 0 ||
      s.c == 0) {
    throw Error(ErrorKind::Parse, "shape must look like HxWxC with positive sizes, got '" + text + "'");
  }
  return s;
}

const LayerShape* ShapeReport::find(const std::string& name) const {
  for (const auto& l : layers) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

ShapeReport derive_shapes(std::span<const LayerSpec> layers, Shape input) {
  ShapeReport report;
  std::map<std::string, Shape> outputs;
  std::vector<Shape> pooled_from;  // shapes entering each max_pool, innermost last
  Shape current = input;
  for (const LayerSpec& layer : layers) {
    Shape in = current;
    if (layer.skip_from) {
      const auto it = outputs.find(*layer.skip_from);
      if (it == outputs.end()) {
        throw Error(ErrorKind::Validation,
                    "layer " + layer.name + " concatenates '" + *layer.skip_from + "', which does not precede it");
      }
      if (it->second.h != in.h || it->second.w != in.w) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("cannot concatenate {} ({}) onto the input of {} ({})", *layer.skip_from,
                                to_string(it->second), layer.name, to_string(in)));
      }
      in.c += it->second.c;
    }
    Shape out = in;
    switch (layer.kind) {
      case LayerKind::Conv:
        if (layer.out_channels > 0) out.c = layer.out_channels;
        break;
      case LayerKind::DenseBlock: {
        const std::size_t grown = layer.repetitions * layer.growth_rate;
        out.c = layer.emit_new_only ? grown : in.c + grown;
        break;
      }
      case LayerKind::MaxPool:
        if (in.h % 2 != 0 || in.w % 2 != 0) {
          report.warnings.push_back(
              fmt::format("{}: pooling odd size {}x{} drops the last row/column", layer.name, in.h, in.w));
        }
        pooled_from.push_back(in);
        out.h = in.h / 2;
        out.w = in.w / 2;
        break;
      case LayerKind::UpConv:
        out.h = in.h * 2;
        out.w = in.w * 2;
        if (layer.out_channels > 0) out.c = layer.out_channels;
        if (!pooled_from.empty()) {
          const Shape before = pooled_from.back();
          pooled_from.pop_back();
          if (before.h != out.h || before.w != out.w) {
            report.warnings.push_back(fmt::format("{}: up-sampling to {}x{} does not invert the pooling of {}x{}",
                                                  layer.name, out.h, out.w, before.h, before.w));
          }
        }
        break;
    }
    if (!outputs.emplace(layer.name, out).second) {
      throw Error(ErrorKind::Validation, "duplicate layer name '" + layer.name + "'");
    }
    report.layers.push_back({layer.name, layer.kind, in, out});
    current = out;
  }
  return report;
}

std::uint64_t conv_weights(std::size_t kh, std::size_t kw, std::size_t c_in, std::size_t c_out, bool separable) {
  const std::uint64_t k = static_cast<std::uint64_t>(kh) * kw;
  if (separable) return k * c_in + static_cast<std::uint64_t>(c_in) * c_out;
  return k * c_in * c_out;
}

ParamReport count_params(std::span<const LayerSpec> layers, Shape input) {
  const ShapeReport shapes = derive_shapes(layers, input);
  ParamReport report;
  bool decoder = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& spec = layers[i];
    const LayerShape& shape = shapes.layers[i];
    if (spec.kind == LayerKind::UpConv) decoder = true;
    LayerParams p;
    p.name = spec.name;
    p.depth_separable = spec.depth_separable;
    p.in_decoder = decoder;
    const std::size_t c_in = shape.input.c;
    switch (spec.kind) {
      case LayerKind::Conv:
      case LayerKind::UpConv:
        p.standard = conv_weights(spec.kernel_h, spec.kernel_w, c_in, shape.output.c, false);
        p.separable = conv_weights(spec.kernel_h, spec.kernel_w, c_in, shape.output.c, true);
        p.biases = shape.output.c;
        p.norm = 2 * shape.output.c;
        break;
      case LayerKind::DenseBlock:
        // Every internal layer sees the block input plus all maps grown so far.
        for (std::size_t r = 0; r < spec.repetitions; ++r) {
          const std::size_t layer_in = c_in + r * spec.growth_rate;
          p.standard += conv_weights(spec.kernel_h, spec.kernel_w, layer_in, spec.growth_rate, false);
          p.separable += conv_weights(spec.kernel_h, spec.kernel_w, layer_in, spec.growth_rate, true);
          p.biases += spec.growth_rate;
          p.norm += 2 * layer_in;
        }
        break;
      case LayerKind::MaxPool:
        break;
    }
    const bool decoder_block = p.in_decoder && spec.kind == LayerKind::DenseBlock;
    report.as_specified += p.weights();
    report.all_standard += p.standard;
    report.standard_decoder += decoder_block ? p.standard : p.weights();
    report.separable_decoder += decoder_block ? p.separable : p.weights();
    report.biases += p.biases;
    report.norm += p.norm;
    report.layers.push_back(std::move(p));
  }
  return report;
}

std::vector<LayerSpec> parse_netspec(const std::string& text, const std::string& source) {
  std::vector<LayerSpec> layers;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> tok;
    for (std::string w; words >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    if (tok.size() < 2) throw Error(ErrorKind::Parse, where + ": expected '<name> <kind> ...'");

    LayerSpec spec;
    spec.name = tok[0];
    const std::string& kind = tok[1];
    if (kind == "conv") {
      spec.kind = LayerKind::Conv;
    } else if (kind == "dense_block") {
      spec.kind = LayerKind::DenseBlock;
    } else if (kind == "max_pool") {
      spec.kind = LayerKind::MaxPool;
    } else if (kind == "up_conv") {
      spec.kind = LayerKind::UpConv;
    } else {
      throw Error(ErrorKind::Parse, where + ": unknown layer kind '" + kind + "'");
    }

    for (std::size_t k = 2; k < tok.size(); ++k) {
      const std::string& t = tok[k];
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        if (t == "separable") {
          spec.depth_separable = true;
        } else if (t == "new_only") {
          spec.emit_new_only = true;
        } else {
          throw Error(ErrorKind::Parse, where + ": unknown flag '" + t + "'");
        }
        continue;
      }
      const std::string key = t.substr(0, eq);
      const std::string value = t.substr(eq + 1);
      if (key == "out") {
        spec.out_channels = parse_count(value, where);
      } else if (key == "reps") {
        spec.repetitions = parse_count(value, where);
      } else if (key == "growth") {
        spec.growth_rate = parse_count(value, where);
      } else if (key == "skip") {
        if (value.empty()) throw Error(ErrorKind::Parse, where + ": empty skip source");
        spec.skip_from = value;
      } else if (key == "kernel") {
        const auto x = value.find('x');
        if (x == std::string::npos) throw Error(ErrorKind::Parse, where + ": kernel must be KHxKW");
        spec.kernel_h = parse_count(value.substr(0, x), where);
        spec.kernel_w = parse_count(value.substr(x + 1), where);
      } else {
        throw Error(ErrorKind::Parse, where + ": unknown key '" + key + "'");
      }
    }

    if (spec.kernel_h == 0 || spec.kernel_w == 0) throw Error(ErrorKind::Parse, where + ": kernel dims must be positive");
    if (spec.kind == LayerKind::DenseBlock && (spec.repetitions == 0 || spec.growth_rate == 0)) {
      throw Error(ErrorKind::Parse, where + ": dense_block needs reps >= 1 and growth > 0");
    }
    if (spec.kind == LayerKind::Conv && spec.out_channels == 0) {
      throw Error(ErrorKind::Parse, where + ": conv needs out=<channels>");
    }
    layers.push_back(std::move(spec));
  }
  if (layers.empty()) throw Error(ErrorKind::Validation, source + ": no layers");
  return layers;
}

std::vector<LayerSpec> load_netspec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_netspec(buf.str(), path.string());
}

void print_report(const ShapeReport& shapes, const ParamReport& params, std::ostream& out) {
  fmt::print(out, "{:<12}{:<12}{:>16}{:>6}{:>14}{:>14}\n", "layer", "kind", "HxWxC", "sep", "standard",
             "separable");
  for (std::size_t i = 0; i < shapes.layers.size(); ++i) {
    const auto& s = shapes.layers[i];
    const auto& p = params.layers[i];
    fmt::print(out, "{:<12}{:<12}{:>16}{:>6}{:>14}{:>14}\n", s.name, kind_name(s.kind), to_string(s.output),
               p.depth_separable ? "yes" : "no", p.standard, p.separable);
  }
  const auto millions = [](std::uint64_t v) { return fmt::format("{:.2f}M", static_cast<double>(v) / 1e6); };
  fmt::print(out, "\nweights as specified:        {:>10} ({})\n", params.as_specified, millions(params.as_specified));
  fmt::print(out, "weights, standard decoder:   {:>10} ({})\n", params.standard_decoder,
             millions(params.standard_decoder));
  fmt::print(out, "weights, separable decoder:  {:>10} ({})\n", params.separable_decoder,
             millions(params.separable_decoder));
  fmt::print(out, "weights, all standard:       {:>10} ({})\n", params.all_standard, millions(params.all_standard));
  fmt::print(out, "biases (not in totals):      {:>10}\n", params.biases);
  fmt::print(out, "norm params (not in totals): {:>10}\n", params.norm);
  for (const auto& w : shapes.warnings) fmt::print(out, "warning: {}\n", w);
}

}  // namespace lts::net
