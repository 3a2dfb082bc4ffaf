fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(concurrent_zk::cli::run(&argv));
}
