// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(regime_mitigator::cli::execute(std::env::args_os()));
}
