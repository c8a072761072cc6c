#pragma once

#include <string>
#include <string_view>

namespace skt::proc {

struct RunResult {
  int exit_code = -1;  // -1: killed by signal
  std::string out;
  std::string err;
};

// Runs `command` via /bin/sh -c, feeding stdin_data and capturing both
// output streams. Blocks until the child exits. Throws skt::ClientError if
// the child cannot be spawned.
RunResult run_command(const std::string& command, std::string_view stdin_data);

}  // namespace skt::proc
