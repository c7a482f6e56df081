fn main() {
    std::process::exit(double_metrics::cli::run(std::env::args_os()));
}
