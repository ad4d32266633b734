"""
Setup script for the chemotactic Lotka-Volterra pattern laboratory
"""
import sys
from pathlib import Path

from config import Config


def create_directories():
    """Create necessary directories"""
    print("Creating directories...")
    Config.create_directories()
    print("✓ Directories created successfully")


def create_sample_config():
    """Create sample configuration file"""
    print("Creating sample configuration...")

    sample_config = """# Chemotactic Lotka-Volterra pattern lab configuration
# Copy this file to .env and modify as needed

# Output storage
CHEMOLV_OUTPUT_PATH=./output
CHEMOLV_RESULTS_DB=runs.db

# Parallel sweeps
CHEMOLV_WORKERS=4

# Minute-scale acceptance tests
CHEMOLV_SLOW_TESTS=0

# Logging
LOG_LEVEL=INFO
LOG_FILE=./logs/chemolv.log
"""

    with open(Path(".env.example"), "w") as f:
        f.write(sample_config)

    print("✓ Sample configuration created (.env.example)")


def create_gitignore():
    """Create .gitignore file"""
    print("Creating .gitignore...")

    gitignore_content = """# Python
__pycache__/
*.py[cod]
build/
dist/
*.egg-info/

# Virtual Environment
venv/
env/

# IDE
.vscode/
.idea/

# Results
output/
logs/
*.db

# Environment variables
.env

# pytest
.pytest_cache/
"""

    with open(Path(".gitignore"), "w") as f:
        f.write(gitignore_content)

    print("✓ .gitignore created")


def create_makefile():
    """Create Makefile for common operations"""
    print("Creating Makefile...")

    makefile_content = """# Chemotactic Lotka-Volterra pattern lab Makefile

.PHONY: help install test test-slow clean fig1b fig4 table1

help: ## Show this help message
	@grep -E '^[a-zA-Z0-9_-]+:.*?## .*$$' $(MAKEFILE_LIST) | sort | awk 'BEGIN {FS = ":.*?## "}; {printf "  \\033[36m%-12s\\033[0m %s\\n", $$1, $$2}'

install: ## Install dependencies
	pip install -r requirements.txt

test: ## Run fast tests
	pytest

test-slow: ## Run acceptance tests (minutes)
	CHEMOLV_SLOW_TESTS=1 pytest

fig1b: ## Eight-spike pattern at L = 250
	python main.py simulate --preset fig1b --out output/fig1b

fig4: ## Finite-amplitude pattern in weak-strong competition
	python main.py simulate --preset fig4 --out output/fig4

table1: ## Galerkin coefficients at L = 15
	python main.py galerkin --preset table1 --out output/table1

clean: ## Clean up outputs and logs
	rm -rf output/* logs/*
"""

    with open(Path("Makefile"), "w") as f:
        f.write(makefile_content)

    print("✓ Makefile created")


def main():
    """Main setup function"""
    print("Chemotactic Lotka-Volterra pattern lab - Setup")
    print("=" * 40)

    try:
        create_directories()
        create_sample_config()
        create_gitignore()
        create_makefile()

        print("\n" + "=" * 40)
        print("✓ Setup completed successfully!")
        print("\nNext steps:")
        print("1. Copy .env.example to .env and configure your settings")
        print("2. Install dependencies: pip install -r requirements.txt")
        print("3. Run tests: pytest")
        print("4. Run a preset: python main.py simulate --preset fig1b")

    except Exception as e:
        print(f"Error during setup: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
