fn main() {
    std::process::exit(inviscid_lab::cli::run(std::env::args_os()));
}
