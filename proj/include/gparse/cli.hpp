#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gparse/decoder.hpp"
#include "gparse/parallel.hpp"

namespace gparse {

enum class DecoderKind { AStar, BestFirst, Beam, Rerank };

struct DecoderSpec {
  DecoderKind kind = DecoderKind::AStar;
  std::size_t n = 0;  // beam width or n-best size

  std::string str() const;
};

// "astar", "best_first", "beam:N", "rerank:N".
DecoderSpec parse_decoder_spec(std::string_view text);

DecodeResult run_decoder(const DecoderSpec& spec, const SearchProblem& problem, const DecodeOptions& options);

// "forest,agenda,units", each a positive count.
DecodeLimits parse_limits(std::string_view text);

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kVerify = 3;
}  // namespace exit_code

// Entry point of the command-line tool; `out` receives results written to
// standard output, `err` diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gparse
