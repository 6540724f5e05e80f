fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    mhsic::cli::configure_threads();
    std::process::exit(mhsic::cli::main_with_args(std::env::args_os()));
}
