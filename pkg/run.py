from reward_profiling import cli

if __name__ == "__main__":
    cli()
