#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "hetnet/env.hpp"

// JSON-lines request/reply protocol around one environment instance.
//
//   {"id":1,"kind":"reset","seed":7}        -> {"id":1,"kind":"state_reply","state":[...]}
//   {"id":2,"kind":"step","action":[...]}   -> {"id":2,"kind":"step_reply","state":[...],"reward":r,"done":b}
//   {"id":3,"kind":"spaces"}                -> {"id":3,"kind":"spaces_reply","state_dim":n,"action_dim":m}
//   {"id":4,"kind":"close"}                 -> {"id":4,"kind":"close"}
//
// Anything else gets {"id":...,"kind":"error","message":...} and the session
// continues. Doubles are written in shortest round-trip form.
namespace hetnet {

class WireServer {
 public:
  explicit WireServer(EnvConfig config);

  // Exactly one reply line (without the trailing newline) per request line.
  std::string handle(std::string_view line);
  bool closed() const { return closed_; }

 private:
  HetNetEnv env_;
  bool closed_ = false;
};

// Serves requests until close or end of input. Returns the process exit code.
int serve(const EnvConfig& config, std::istream& in, std::ostream& out);

}  // namespace hetnet
