package main

import "fmt"

func parse(input string) string {
	return input
}

func main() {
	fmt.Println(parse("v1.3"))
}
