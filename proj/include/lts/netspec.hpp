#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace lts::net {

enum class LayerKind { Conv, DenseBlock, MaxPool, UpConv };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t out_channels = 0;  // conv / up_conv; 0 keeps the input channel count
  std::size_t repetitions = 1;   // dense_block
  std::size_t growth_rate = 0;   // dense_block
  bool depth_separable = false;
  bool emit_new_only = false;    // dense_block passes on only the maps it grew
  std::optional<std::string> skip_from;  // output concatenated onto this layer's input
};

struct Shape {
  std::size_t h = 0, w = 0, c = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);
/// Parses "64x512x5".
Shape parse_shape(const std::string& text);

struct LayerShape {
  std::string name;
  LayerKind kind;
  Shape input;  // after any skip concatenation
  Shape output;
};

struct ShapeReport {
  std::vector<LayerShape> layers;
  std::vector<std::string> warnings;

  const LayerShape* find(const std::string& name) const;
};

/// Feature-map shapes. Convs keep H and W, pooling floor-halves them,
/// up-convs double them, dense blocks add repetitions * growth channels (or
/// emit only those when `emit_new_only`).
ShapeReport derive_shapes(std::span<const LayerSpec> layers, Shape input);

struct LayerParams {
  std::string name;
  bool depth_separable = false;
  bool in_decoder = false;  // at or after the first up_conv
  std::uint64_t standard = 0;   // weights with ordinary convolutions
  std::uint64_t separable = 0;  // weights with depthwise + pointwise convolutions
  std::uint64_t biases = 0;
  std::uint64_t norm = 0;       // batch-norm scale and shift

  std::uint64_t weights() const { return depth_separable ? separable : standard; }
};

/// Weight totals; biases and normalization are itemized separately.
struct ParamReport {
  std::vector<LayerParams> layers;
  std::uint64_t as_specified = 0;
  std::uint64_t all_standard = 0;
  std::uint64_t standard_decoder = 0;   // decoder dense blocks forced to standard convs
  std::uint64_t separable_decoder = 0;  // decoder dense blocks forced to separable convs
  std::uint64_t biases = 0;
  std::uint64_t norm = 0;
};

/// Standard conv: kh*kw*Cin*Cout. Depth-separable: kh*kw*Cin + Cin*Cout.
std::uint64_t conv_weights(std::size_t kh, std::size_t kw, std::size_t c_in, std::size_t c_out, bool separable);

ParamReport count_params(std::span<const LayerSpec> layers, Shape input);

/// One layer per line: `<name> <kind> [key=value | flag]...`; `#` starts a
/// comment. Kinds: conv, dense_block, max_pool, up_conv. Keys: out, kernel
/// (KHxKW), reps, growth, skip. Flags: separable, new_only.
std::vector<LayerSpec> parse_netspec(const std::string& text, const std::string& source = "<netspec>");
std::vector<LayerSpec> load_netspec(const std::filesystem::path& path);

void print_report(const ShapeReport& shapes, const ParamReport& params, std::ostream& out);

}  // namespace lts::net
