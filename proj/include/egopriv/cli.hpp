#pragma once

#include <string>
#include <vector>

namespace egopriv::cli {

// Exit codes: 0 success, 1 module error (one "error <code>: <message>" line on
// stderr), 2 usage error.
int run(const std::vector<std::string>& args);
int main(int argc, char** argv);

}  // namespace egopriv::cli
