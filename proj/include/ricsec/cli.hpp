#pragma once

#include <iosfwd>

namespace ricsec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Environment variable holding the chat-completions API key.
inline constexpr const char* kApiKeyEnv = "RICSEC_LLM_API_KEY";

/// Entry point for `ricsec simulate|gen-dataset|eval|replay`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ricsec
