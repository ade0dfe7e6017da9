// Minimal warning channel. Library code reports recoverable problems here;
// the CLI routes them to stderr and into manifests.
#pragma once

#include <functional>
#include <string>

namespace cascade {

using WarningSink = std::function<void(const std::string&)>;

/// Replace the sink; returns the previous one. The default prints to stderr.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace cascade
