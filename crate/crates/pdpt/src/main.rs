fn main() {
    std::process::exit(pdpt::cli::run(std::env::args_os()));
}
