#pragma once

#include <functional>
#include <string>

namespace embcmp {

// Warnings from library code (dropped edges, clamped parameters, ...).
// Default sink writes to stderr.
using WarningSink = std::function<void(const std::string&)>;

void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

} // namespace embcmp
