function fetchItems() {
  $.getJSON("https://api.example.com/v1/items", function(items) {
    show(items);
  });
}
