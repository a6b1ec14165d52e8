// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(vnerg::cli::main_with(std::env::args_os()));
}
