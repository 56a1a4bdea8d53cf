#pragma once

#include <string>

namespace sledbench {

// "sledbench <semver> (<git describe>)", fixed at configure time.
std::string version_string();

} // namespace sledbench
