#pragma once

#include <stdexcept>
#include <string>

namespace dendromatch {

// Malformed or inconsistent input data (files, labels, manifests). The CLI
// maps this to exit code 2; anything else escaping a subcommand maps to 3.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dendromatch
