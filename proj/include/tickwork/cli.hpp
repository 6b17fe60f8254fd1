#pragma once

namespace tickwork {

/// Entry point behind the tickwork binary; returns the process exit code.
/// Validation failures print a JSON object {error_kind, detail} on standard
/// error and exit with code 2.
int run_cli(int argc, char** argv);

}  // namespace tickwork
