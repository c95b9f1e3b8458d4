fn main() {
    qgraph_loc::cli::main()
}
