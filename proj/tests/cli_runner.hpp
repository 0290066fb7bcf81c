#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace cli {

struct Run {
  int exit_code = -1;
  std::string out;
};

/// Runs the ccpca binary with `args` (already shell-quoted), capturing stdout.
inline Run run(const std::string& args) {
  const std::string command = std::string("\"") + CCPCA_CLI_PATH + "\" " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace cli
