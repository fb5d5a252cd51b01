fn main() {
    std::process::exit(l1mf::cli::run(std::env::args_os()));
}
