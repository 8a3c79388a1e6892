#pragma once

namespace pathsmooth {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitValidation = 4 };

/// pathsmooth {simulate|score|fit|select|validate} [flags]
int run_cli(int argc, char** argv);

}  // namespace pathsmooth
