#pragma once

#include <cstdio>
#include <string>

namespace pipecomm {

// Warnings go to stderr so report output on stdout stays clean.
inline void warn(const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

} // namespace pipecomm
