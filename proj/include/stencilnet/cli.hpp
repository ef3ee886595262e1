#pragma once

namespace stencilnet {

// Parses argv and dispatches to one of the subcommands (weights,
// stability, train, evaluate, sweep, export-plot-data). Returns the
// process exit status: 0 on success, 2 on usage or domain errors, 1 on
// runtime failures. Errors are reported as a single "error: ..." line on
// stderr.
int cli_main(int argc, const char* const* argv);

}  // namespace stencilnet
