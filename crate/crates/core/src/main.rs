fn main() {
    std::process::exit(dpp_moments::cli::dispatch(std::env::args_os()));
}
