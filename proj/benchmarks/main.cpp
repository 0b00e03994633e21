// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

// The distro's benchmark_main archive carries LTO bytecode tied to another
// compiler build, so the entry point lives here.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
