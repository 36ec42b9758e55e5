fn main() {
    std::process::exit(riemsub_bench::run(std::env::args_os()));
}
