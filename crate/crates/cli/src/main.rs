fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(stdmap_lab::run(args));
}
