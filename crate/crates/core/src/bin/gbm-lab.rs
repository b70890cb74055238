fn main() {
    std::process::exit(gbm_lab::cli::run(std::env::args_os()));
}
