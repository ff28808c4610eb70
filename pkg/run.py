from reldisco.cli import cli

# 설정 클래스는 RELDISCO_CONFIG (development / production / testing / default)
if __name__ == '__main__':
    cli()
