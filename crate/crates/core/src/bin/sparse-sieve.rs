fn main() {
    std::process::exit(sparse_sieve::cli::run(std::env::args_os()));
}
