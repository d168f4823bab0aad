fn main() {
    std::process::exit(llg_shrinker_cli::run(std::env::args_os()));
}
