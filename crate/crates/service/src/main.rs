// SPDX-License-Identifier: Apache-2.0

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    std::process::exit(wikipulse::cli::main_with_args(std::env::args_os()));
}
