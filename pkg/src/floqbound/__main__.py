from floqbound.harness.cli import main

main()
