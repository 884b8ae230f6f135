#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace taglets::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace taglets::cli
